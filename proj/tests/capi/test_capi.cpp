// Exercises the shared-library surface exactly as an external caller would:
// only aidl/aidl.h, no internal headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstring>
#include <string>

#include "aidl/aidl.h"

namespace {

const char* kProgram =
    "structure plate : Solid {\n"
    "  rect body = Rectangle(origin=(0, 0), width=10, height=10)\n"
    "  structure bore : Hole {\n"
    "    point c = Point(x=5, y=5)\n"
    "    circle k = Circle(center=c, radius=2)\n"
    "  }\n"
    "}\n";

}  // namespace

TEST_CASE("version string") {
  CHECK(std::strlen(aidl_version()) > 0);
}

TEST_CASE("check and solve through the C API") {
  aidl_run* run = aidl_check("p.aidl", kProgram, nullptr);
  REQUIRE(run);
  CHECK(aidl_run_status(run) == AIDL_OK);
  CHECK(aidl_run_diagnostic_count(run) == 0);
  CHECK(aidl_run_model_json(run) == nullptr);  // check never solves
  aidl_run_free(run);

  run = aidl_solve("p.aidl", kProgram, nullptr);
  REQUIRE(run);
  CHECK(aidl_run_status(run) == AIDL_OK);
  REQUIRE(aidl_run_model_json(run));
  auto j = nlohmann::json::parse(aidl_run_model_json(run));
  CHECK(j.at("solve").at("status") == "solved");
  REQUIRE(aidl_run_report_json(run));
  auto rep = nlohmann::json::parse(aidl_run_report_json(run));
  CHECK(rep.at("exit_code") == 0);
  aidl_run_free(run);
}

TEST_CASE("diagnostics come out as parseable records") {
  aidl_run* run = aidl_check("bad.aidl",
                             "structure s : Solid {\n"
                             "  point p = Point(x=0, y=0)\n"
                             "  constrain Rotate(p)\n"
                             "}\n",
                             nullptr);
  REQUIRE(run);
  CHECK(aidl_run_status(run) == AIDL_ERROR_VALIDATION);
  REQUIRE(aidl_run_diagnostic_count(run) == 1);
  auto j = nlohmann::json::parse(aidl_run_diagnostic_json(run, 0));
  CHECK(j.at("code") == "E0005");
  CHECK(j.at("severity") == "error");
  CHECK(j.at("file") == "bad.aidl");
  // human text carries the same message
  std::string text = aidl_run_diagnostic_text(run, 0);
  CHECK(text.find(j.at("message").get<std::string>()) != std::string::npos);
  aidl_run_free(run);
}

TEST_CASE("render and render-from-json agree") {
  aidl_run* solved = aidl_solve("p.aidl", kProgram, nullptr);
  REQUIRE(solved);
  REQUIRE(aidl_run_model_json(solved));
  aidl_run* direct = aidl_render("p.aidl", kProgram, nullptr);
  REQUIRE(direct);
  REQUIRE(aidl_run_svg(direct));
  aidl_run* via_json = aidl_render_model_json("p.json", aidl_run_model_json(solved), nullptr);
  REQUIRE(via_json);
  REQUIRE(aidl_run_svg(via_json));
  CHECK(std::string(aidl_run_svg(direct)) == aidl_run_svg(via_json));
  aidl_run_free(solved);
  aidl_run_free(direct);
  aidl_run_free(via_json);
}

TEST_CASE("options validate keys and ranges") {
  aidl_options* opts = aidl_options_new();
  REQUIRE(opts);
  CHECK(aidl_options_set(opts, "tol_residual", 1e-8) == AIDL_OK);
  CHECK(aidl_options_set(opts, "max_newton", 100) == AIDL_OK);
  CHECK(aidl_options_set(opts, "nope", 1) == AIDL_ERROR_ARGUMENT);
  CHECK(aidl_options_set(opts, "tol_residual", -1) == AIDL_ERROR_ARGUMENT);
  CHECK(aidl_options_set(nullptr, "tol_residual", 1) == AIDL_ERROR_ARGUMENT);
  aidl_run* run = aidl_solve("p.aidl", kProgram, opts);
  REQUIRE(run);
  CHECK(aidl_run_status(run) == AIDL_OK);
  aidl_run_free(run);
  aidl_options_free(opts);
}

TEST_CASE("format returns canonical text") {
  aidl_run* run = aidl_format("f.aidl", "structure root : Assembly { }", nullptr);
  REQUIRE(run);
  CHECK(aidl_run_status(run) == AIDL_OK);
  REQUIRE(aidl_run_formatted(run));
  CHECK(std::string(aidl_run_formatted(run)) == "structure root : Assembly { }\n");
  aidl_run_free(run);
}

TEST_CASE("null arguments are rejected, not crashed on") {
  aidl_run* run = aidl_solve(nullptr, nullptr, nullptr);
  REQUIRE(run);
  CHECK(aidl_run_status(run) == AIDL_ERROR_ARGUMENT);
  aidl_run_free(run);
  CHECK(aidl_run_status(nullptr) == AIDL_ERROR_ARGUMENT);
  CHECK(aidl_run_diagnostic_count(nullptr) == 0);
  CHECK(aidl_run_model_json(nullptr) == nullptr);
}
