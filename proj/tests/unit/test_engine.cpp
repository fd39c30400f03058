#include <doctest.h>

#include <json.hpp>

#include "engine.hpp"
#include "jsonout.hpp"

using namespace aidl;

namespace {

const char* kSquareHole =
    "structure plate : Solid {\n"
    "  rect body = Rectangle(origin=(0, 0), width=10, height=10)\n"
    "  structure bore : Hole {\n"
    "    point c = Point(x=5, y=5)\n"
    "    circle k = Circle(center=c, radius=2)\n"
    "  }\n"
    "}\n";

}  // namespace

TEST_CASE("check: valid program passes with no diagnostics") {
  engine::RunConfig cfg;
  auto res = engine::check("ok.aidl", kSquareHole, cfg);
  CHECK(res.exit_code == engine::kExitOk);
  CHECK(res.diagnostics.empty());
}

TEST_CASE("check: unknown constraint exits with a validation error") {
  engine::RunConfig cfg;
  auto res = engine::check("rot.aidl",
                           "structure s : Solid {\n"
                           "  point p = Point(x=0, y=0)\n"
                           "  constrain Rotate(p)\n"
                           "}\n",
                           cfg);
  CHECK(res.exit_code == engine::kExitValidation);
  REQUIRE_FALSE(res.diagnostics.empty());
  CHECK(res.diagnostics[0].code == "E0005");
  // machine-readable record round-trips through a JSON parser
  auto j = nlohmann::json::parse(diagnostic_json(res.diagnostics[0]));
  CHECK(j.at("code") == "E0005");
  CHECK(j.at("message").get<std::string>().find("Angle") != std::string::npos);
  CHECK(j.at("line").get<int>() == 3);
}

TEST_CASE("solve: contradictory equalities exit with a solve failure") {
  engine::RunConfig cfg;
  auto res = engine::solve("bad.aidl",
                           "structure s : Solid {\n"
                           "  param x = 0.5\n"
                           "  constrain x == 0\n"
                           "  constrain x == 1\n"
                           "}\n",
                           cfg);
  CHECK(res.exit_code == engine::kExitSolve);
  CHECK(res.status == SolveStatus::Inconsistent);
  CHECK(res.report_json.find("\"status\":\"inconsistent\"") != std::string::npos);
}

TEST_CASE("solve: zero constraints is trivially solved at init values") {
  engine::RunConfig cfg;
  auto res = engine::solve("triv.aidl",
                           "structure s : Solid {\n"
                           "  point p = Point(x=1.5, y=2.5)\n"
                           "}\n",
                           cfg);
  CHECK(res.exit_code == engine::kExitOk);
  auto j = nlohmann::json::parse(res.model_json);
  CHECK(j.at("model").at("geometry").at(0).at("x").get<double>() == 1.5);
}

TEST_CASE("solve: repeated runs are byte-identical") {
  engine::RunConfig cfg;
  auto a = engine::solve("d.aidl", kSquareHole, cfg);
  auto b = engine::solve("d.aidl", kSquareHole, cfg);
  REQUIRE(a.exit_code == engine::kExitOk);
  CHECK(a.model_json == b.model_json);
  auto ra = engine::render("d.aidl", kSquareHole, cfg);
  auto rb = engine::render("d.aidl", kSquareHole, cfg);
  REQUIRE(ra.exit_code == engine::kExitOk);
  CHECK(ra.svg == rb.svg);
}

TEST_CASE("solve: programs identical up to synonyms give bit-identical output") {
  const char* a_src =
      "structure s : Solid {\n"
      "  point a = Point(x=0, y=0)\n"
      "  point b = Point(x=1, y=0.1)\n"
      "  line l = Line(start=a, end=b)\n"
      "  point c = Point(x=0, y=1)\n"
      "  line k = Line(start=a, end=c)\n"
      "  constrain Perpendicular(l, k)\n"
      "}\n";
  std::string b_src = a_src;
  b_src.replace(b_src.find("Perpendicular"), 13, "Orthogonal");
  engine::RunConfig cfg;
  auto ra = engine::solve("a.aidl", a_src, cfg);
  auto rb = engine::solve("a.aidl", b_src.c_str(), cfg);
  REQUIRE(ra.exit_code == engine::kExitOk);
  REQUIRE(rb.exit_code == engine::kExitOk);
  CHECK(ra.model_json == rb.model_json);
}

TEST_CASE("render: square minus circle yields one path with two subpaths") {
  engine::RunConfig cfg;
  auto res = engine::render("r.aidl", kSquareHole, cfg);
  REQUIRE(res.exit_code == engine::kExitOk);
  std::size_t first = res.svg.find("Z M");
  CHECK(first != std::string::npos);  // hole ring follows the outer ring
}

TEST_CASE("render: from a solved-model JSON document") {
  engine::RunConfig cfg;
  auto solved = engine::solve("r.aidl", kSquareHole, cfg);
  REQUIRE(solved.exit_code == engine::kExitOk);
  auto rendered = engine::render_json("r.json", solved.model_json, cfg);
  REQUIRE(rendered.exit_code == engine::kExitOk);
  auto direct = engine::render("r.aidl", kSquareHole, cfg);
  CHECK(rendered.svg == direct.svg);
}

TEST_CASE("render: empty drawing model is degenerate-safe") {
  engine::RunConfig cfg;
  auto res = engine::render("e.aidl", "structure d : Drawing { }\n", cfg);
  REQUIRE(res.exit_code == engine::kExitOk);
  CHECK(res.svg.find("viewBox") != std::string::npos);
  CHECK(res.svg.find("nan") == std::string::npos);
}

TEST_CASE("solved model json: expression serialization uses prefix s-expressions") {
  engine::RunConfig cfg;
  auto res = engine::solve("sx.aidl",
                           "structure s : Solid {\n"
                           "  param w = 3\n"
                           "  constrain w == 3\n"
                           "}\n",
                           cfg);
  REQUIRE(res.exit_code == engine::kExitOk);
  auto j = nlohmann::json::parse(res.model_json);
  auto residual =
      j.at("model").at("constraints").at(0).at("residuals").at(0).get<std::string>();
  CHECK(residual.find("(param \"s.w\")") != std::string::npos);
}
