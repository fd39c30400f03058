// aidl command line: check, solve and render AIDL programs. Talks to the
// engine exclusively through the public C API in aidl/aidl.h.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aidl/aidl.h"

namespace {

int log_level() {
  // AIDL_LOG: quiet (default) | info | debug — log verbosity only
  const char* env = std::getenv("AIDL_LOG");
  if (!env) return 0;
  std::string v = env;
  if (v == "info") return 1;
  if (v == "debug") return 2;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "aidl: " << msg << "\n";
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return in.good() || in.eof();
}

bool write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << data;
  return out.good();
}

std::string stem_with(const std::string& path, const char* suffix) {
  std::string out = path;
  std::size_t dot = out.find_last_of('.');
  std::size_t slash = out.find_last_of('/');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    out.resize(dot);
  return out + suffix;
}

bool ends_with(const std::string& s, const char* suffix) {
  std::string suf = suffix;
  return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

struct Cli {
  bool json = false;
  std::string out_path;
  double tol_residual = 0, chord_tol = 0, join_tol = 0;
  int max_newton = 0, max_outer = 0;
  std::vector<std::string> files;
};

aidl_options* make_options(const Cli& cli) {
  aidl_options* opts = aidl_options_new();
  if (cli.tol_residual > 0) aidl_options_set(opts, "tol_residual", cli.tol_residual);
  if (cli.max_newton > 0) aidl_options_set(opts, "max_newton", cli.max_newton);
  if (cli.max_outer > 0) aidl_options_set(opts, "max_outer", cli.max_outer);
  if (cli.chord_tol > 0) aidl_options_set(opts, "chord_tol", cli.chord_tol);
  if (cli.join_tol > 0) aidl_options_set(opts, "join_tol", cli.join_tol);
  return opts;
}

void print_diagnostics(const aidl_run* run, bool json) {
  size_t n = aidl_run_diagnostic_count(run);
  for (size_t i = 0; i < n; ++i) {
    if (json) std::cout << aidl_run_diagnostic_json(run, i) << "\n";
    else std::cerr << aidl_run_diagnostic_text(run, i) << "\n";
  }
}

int io_error(const Cli& cli, const std::string& path, const char* what) {
  if (cli.json) {
    std::cout << "{\"code\":\"E0011\",\"severity\":\"error\",\"message\":\"" << what << "\",\"file\":\""
              << path << "\",\"line\":0,\"col\":0,\"end_line\":0,\"end_col\":0,\"path\":\"\"}\n";
  } else {
    std::cerr << path << ": error [E0011] " << what << "\n";
  }
  return 2;
}

int run_one(const std::string& command, const Cli& cli, const std::string& path,
            aidl_options* opts) {
  std::string text;
  if (!read_file(path, text)) return io_error(cli, path, "cannot read file");

  aidl_run* run = nullptr;
  if (command == "check") {
    run = aidl_check(path.c_str(), text.c_str(), opts);
  } else if (command == "solve") {
    run = aidl_solve(path.c_str(), text.c_str(), opts);
  } else {  // render
    if (ends_with(path, ".json"))
      run = aidl_render_model_json(path.c_str(), text.c_str(), opts);
    else
      run = aidl_render(path.c_str(), text.c_str(), opts);
  }
  if (!run) return io_error(cli, path, "out of memory");

  print_diagnostics(run, cli.json);
  int code = static_cast<int>(aidl_run_status(run));

  if (command == "solve" && aidl_run_model_json(run)) {
    std::string out = cli.out_path.empty() ? stem_with(path, ".solved.json") : cli.out_path;
    if (!write_file(out, aidl_run_model_json(run))) {
      aidl_run_free(run);
      return io_error(cli, out, "cannot write file");
    }
    log_info("wrote " + out);
  }
  if (command == "render" && aidl_run_svg(run)) {
    std::string out = cli.out_path.empty() ? stem_with(path, ".svg") : cli.out_path;
    if (!write_file(out, aidl_run_svg(run))) {
      aidl_run_free(run);
      return io_error(cli, out, "cannot write file");
    }
    log_info("wrote " + out);
  }
  if (cli.json && aidl_run_report_json(run)) {
    std::cout << aidl_run_report_json(run) << "\n";
  } else if (!cli.json) {
    std::cout << path << ": "
              << (code == 0 ? "ok" : code == 1 ? "validation failed" : "solve failed") << "\n";
  }
  aidl_run_free(run);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aidl — solver-aided hierarchical 2D CAD language"};
  app.require_subcommand(1);

  Cli cli;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", cli.json, "emit line-delimited JSON records");
    sub->add_option("--out", cli.out_path, "output path (single input only)");
    sub->add_option("--tol-residual", cli.tol_residual, "solver residual tolerance");
    sub->add_option("--max-newton", cli.max_newton, "Newton iteration budget");
    sub->add_option("--max-outer", cli.max_outer, "outer re-pin iteration budget");
    sub->add_option("--chord-tol", cli.chord_tol, "tessellation chord tolerance");
    sub->add_option("--join-tol", cli.join_tol, "endpoint joining tolerance");
    sub->add_option("files", cli.files, "input files")->required()->expected(-1);
  };
  CLI::App* check = app.add_subcommand("check", "validate programs without solving");
  CLI::App* solve = app.add_subcommand("solve", "solve programs and write solved-model JSON");
  CLI::App* render = app.add_subcommand("render", "solve and render SVG (accepts .aidl or solved .json)");
  add_common(check);
  add_common(solve);
  add_common(render);

  CLI11_PARSE(app, argc, argv);

  std::string command = app.get_subcommands().front()->get_name();
  if (!cli.out_path.empty() && cli.files.size() > 1) {
    std::cerr << "aidl: --out requires a single input file\n";
    return 2;
  }

  aidl_options* opts = make_options(cli);
  int exit_code = 0;
  for (const std::string& path : cli.files) {
    int code = run_one(command, cli, path, opts);
    if (exit_code == 0 && code != 0) exit_code = code;  // first failure wins
  }
  aidl_options_free(opts);
  return exit_code;
}
