// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Paths under AIDL_CORPUS_DIR are the shipped example programs.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "constraints.hpp"
#include "engine.hpp"
#include "geobool.hpp"
#include "lang/elaborate.hpp"
#include "lang/format.hpp"
#include "lang/parser.hpp"
#include "solver.hpp"
#include "test_util.hpp"

using namespace aidl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<fs::path> corpus_programs() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(AIDL_CORPUS_DIR))
    if (e.path().extension() == ".aidl") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

struct Fail {
  std::string detail;
};

#define EXPECT(cond, msg)                               \
  do {                                                  \
    if (!(cond)) throw Fail{std::string("line ") + std::to_string(__LINE__) + ": " + (msg)}; \
  } while (0)

// --- 1: derivative oracle ---------------------------------------------------

void criterion_derivative_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  ExprPool pool;
  std::vector<double> vals(4);
  std::vector<ParamId> params{0, 1, 2, 3};
  testing::ExprGen gen(pool, params, vals, 1729u);
  int checked = 0;
  while (checked < 1000) {
    for (double& v : vals) v = gen.uniform(-10, 10);
    ExprId e = gen.gen(8);
    for (ParamId p : params) {
      if (checked >= 1000) break;
      double sym, fd;
      try {
        sym = eval(pool, differentiate(pool, e, p), vals);
        fd = testing::central_difference(pool, e, p, vals);
      } catch (const DomainError&) {
        continue;
      }
      if (!std::isfinite(sym) || !std::isfinite(fd) || std::fabs(fd) > 1e6) continue;
      ++checked;
      EXPECT(testing::close_rel(sym, fd, 1e-4),
             "derivative mismatch: symbolic " + std::to_string(sym) + " vs fd " +
                 std::to_string(fd));
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT(secs < 5.0, "derivative oracle took " + std::to_string(secs) + "s");
}

// --- 2: slack soundness -------------------------------------------------------

void criterion_slack_soundness() {
  std::mt19937 rng(424242u);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  NewtonConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    Model m;
    StructureId root = m.add_root("root", StructureType::Assembly);
    StructureId a = m.add_structure(root, "a", StructureType::Solid, Orientation::Top,
                                    uni(-4, 4), uni(-4, 4));
    StructureId b = m.add_structure(root, "b", StructureType::Solid, Orientation::Top,
                                    uni(-4, 4), uni(-4, 4));
    m.add_rectangle(a, "ra", 0, 0, uni(1, 4), uni(1, 4));
    m.add_rectangle(b, "rb", 0, 0, uni(5, 9), uni(5, 9));
    m.flatten_compounds(root);

    static const char* names[] = {"Above", "Below", "LeftOf",      "RightOf",
                                  "Taller", "Wider", "CenterInside"};
    ConstraintSpec c;
    c.canonical = names[trial % 7];
    // Taller/Wider need the larger box first to stay satisfiable
    bool swap = std::string(c.canonical) == "Taller" || c.canonical == "Wider";
    c.args = {ConstraintArg::struct_ref(swap ? b : a), ConstraintArg::struct_ref(swap ? a : b)};
    m.add_constraint(root, c);

    // a raw inequality on a free parameter joins every fourth model
    if (trial % 4 == 0) {
      ParamId x = m.add_parameter(root, "x", uni(-10, 10));
      ConstraintSpec raw;
      raw.equation = SurfExpr::compare(CmpOp::Le, SurfExpr::wrap(m.pool().param(x)),
                                       SurfExpr::constant(uni(-5, 5)));
      m.add_constraint(root, raw);
    }

    EXPECT(finalize_deferred(m).empty(), "finalize failed");
    SolveOutcome out = solve_model(m, cfg);
    EXPECT(out.status == SolveStatus::Solved,
           std::string("model ") + std::to_string(trial) + " (" + c.canonical +
               ") did not solve: " + solve_status_name(out.status));

    for (StructureId s = 0; s < m.structure_count(); ++s) {
      for (const auto& lc : m.structure(s).lowered) {
        for (std::size_t k = 0; k < lc.slacks.size(); ++k) {
          double slack = m.value(lc.slacks[k]);
          EXPECT(slack >= -1e-9, "slack below -1e-9");
          // residual pair k starts at 2k: lhs - rhs + s
          double r = eval(m.pool(), lc.residuals[2 * k], m.values());
          double lhs_minus_rhs = r - slack;
          EXPECT(lhs_minus_rhs <= 1e-9, "inequality violated after solve");
        }
      }
    }
  }
}

// --- 3: iterated-Newton branch flip ------------------------------------------

void criterion_branch_flip() {
  // A bounding-box limit whose active max operand changes mid-solve: the top
  // of the box must reach 5 while the coupled point overtakes the initial
  // maximum.
  Model m;
  StructureId root = m.add_root("root", StructureType::Solid);
  GeoId p1 = m.add_point(root, "p1", 0, 1);
  GeoId p2 = m.add_point(root, "p2", 0, 0.5);
  const BBoxInstance& box = m.bounding_box(root, {});

  ExprPool& pool = m.pool();
  const auto& g1 = std::get<PointGeo>(m.geo(p1).shape);
  const auto& g2 = std::get<PointGeo>(m.geo(p2).shape);
  ConstraintSystem sys;
  sys.free = {g1.x, g1.y, g2.x, g2.y};
  sys.residuals = {
      pool.sub(box.top, pool.constant(5.0)),
      pool.add(pool.sub(pool.param(g2.y), pool.mul(pool.constant(2.0), pool.param(g1.y))),
               pool.constant(4.0)),
  };
  NewtonConfig cfg;
  IterationReport rep = iterated_solve(m, sys, cfg);
  EXPECT(rep.solved, "branch-flip system did not solve");
  EXPECT(rep.outer_iters >= 2, "no re-pin happened");
  EXPECT(rep.outer_iters <= 5, "needed more than 5 outer iterations");
  EXPECT(rep.residual_max <= 1e-9, "original residuals above 1e-9");
  // the other point now defines the limit
  EXPECT(m.value(g2.y) > m.value(g1.y), "active operand did not change");
  EXPECT(std::fabs(m.value(g2.y) - 5.0) <= 1e-9, "limit missed the target");
}

// --- 4: substructure preservation --------------------------------------------

void criterion_substructure_preservation() {
  std::mt19937 rng(55u);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  NewtonConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    Model m;
    StructureId root = m.add_root("root", StructureType::Assembly);
    // both children at the same spot so every directional constraint starts
    // violated and must be fixed by translation
    StructureId a = m.add_structure(root, "a", StructureType::Solid);
    StructureId b = m.add_structure(root, "b", StructureType::Solid);
    m.add_rectangle(a, "ra", 0, 0, uni(1, 3), uni(1, 3));
    m.add_rectangle(b, "rb", 0, 0, uni(1, 3), uni(1, 3));
    m.flatten_compounds(root);
    static const char* names[] = {"Above", "Below", "LeftOf", "RightOf"};
    ConstraintSpec c;
    c.canonical = names[trial % 4];
    c.args = {ConstraintArg::struct_ref(a), ConstraintArg::struct_ref(b)};
    m.add_constraint(root, c);
    EXPECT(finalize_deferred(m).empty(), "finalize failed");

    // frame-local geometry before the global solve
    std::vector<std::pair<ParamId, double>> local;
    for (ParamId p = 0; p < m.param_count(); ++p) {
      const ParamMeta& meta = m.param_meta(p);
      if ((meta.owner == a || meta.owner == b) &&
          (meta.role == ParamRole::PointX || meta.role == ParamRole::PointY))
        local.push_back({p, m.value(p)});
    }
    SolveOutcome out = solve_model(m, cfg);
    EXPECT(out.status == SolveStatus::Solved, "translation model did not solve");
    const StageRecord* root_rec = nullptr;
    for (const auto& rec : out.node_reports)
      if (rec.node == root) root_rec = &rec;
    EXPECT(root_rec && root_rec->stage == SolveStage::Translation,
           "stage report does not show the translation stage");
    for (const auto& [p, v] : local)
      EXPECT(std::fabs(m.value(p) - v) <= 1e-12, "child-local geometry moved");
  }
}

// --- 5: deepening escalation ---------------------------------------------------

void criterion_deepening_escalation() {
  engine::RunConfig cfg;
  std::string src = slurp(fs::path(AIDL_CORPUS_DIR) / "deepening.aidl");
  auto res = engine::solve("deepening.aidl", src, cfg);
  EXPECT(res.exit_code == engine::kExitOk, "deepening model did not solve");
  bool geometric = false;
  for (const auto& rec : res.outcome.node_reports)
    if (rec.path == "bracket" && rec.stage == SolveStage::Geometric && rec.solved)
      geometric = true;
  EXPECT(geometric, "stage report does not record the geometric stage");
  EXPECT(res.outcome.residual_max <= 1e-9, "residuals above 1e-9");
}

// --- 6: angle convention disambiguation ----------------------------------------

double solve_probe_angle(double init_y) {
  Model m;
  StructureId root = m.add_root("g", StructureType::Drawing);
  GeoId o = m.add_point(root, "o", 0, 0);
  GeoId tip = m.add_point(root, "tip", 4, 0);
  GeoId edge = m.add_line(root, "edge", o, tip);
  GeoId pe = m.add_point(root, "pe", 3.8, init_y);
  GeoId probe = m.add_line(root, "probe", o, pe);
  ConstraintSpec fix;
  fix.canonical = "Fixed";
  fix.args = {ConstraintArg::geometry(edge)};
  m.add_constraint(root, fix);
  ConstraintSpec ang;
  ang.canonical = "Angle";
  ang.args = {ConstraintArg::geometry(edge), ConstraintArg::geometry(probe),
              ConstraintArg::scalar_expr(SurfExpr::constant(30.0 * std::numbers::pi / 180.0))};
  m.add_constraint(root, ang);
  if (!finalize_deferred(m).empty()) throw Fail{"finalize failed"};
  NewtonConfig cfg;
  SolveOutcome out = solve_model(m, cfg);
  if (out.status != SolveStatus::Solved) throw Fail{"angle model did not solve"};
  const auto& lp = std::get<LineGeo>(m.geo(probe).shape);
  const auto& s = std::get<PointGeo>(m.geo(lp.start).shape);
  const auto& e = std::get<PointGeo>(m.geo(lp.end).shape);
  double dx = m.value(e.x) - m.value(s.x);
  double dy = m.value(e.y) - m.value(s.y);
  return std::atan2(dy, dx);  // edge lies on +x, so this is the line angle
}

void criterion_angle_convention() {
  double target = 30.0 * std::numbers::pi / 180.0;
  double up = solve_probe_angle(1.9);    // ccw reading is nearer
  double down = solve_probe_angle(-1.9); // mirrored: cw reading is nearer
  EXPECT(std::fabs(up - target) <= 1e-6, "ccw convention missed the target");
  EXPECT(std::fabs(down + target) <= 1e-6, "cw convention missed the target");
}

// --- 7: boolean area oracle -----------------------------------------------------

struct Prim {
  bool is_rect = false;
  bool hole = false;
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // rect
  double cx = 0, cy = 0, r = 0;           // circle
  bool contains(double x, double y) const {
    if (is_rect) return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    double dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy <= r * r;
  }
};

void criterion_boolean_oracle() {
  // the named case first: a 10x10 plate with a radius-2 bore
  {
    engine::RunConfig cfg;
    std::string src = slurp(fs::path(AIDL_CORPUS_DIR) / "square_hole.aidl");
    auto res = engine::solve("square_hole.aidl", src, cfg);
    EXPECT(res.exit_code == engine::kExitOk, "square_hole did not solve");
    geobool::GeoboolConfig gcfg;
    auto scene = geobool::build_scene(*res.model, gcfg);
    double expected = 100.0 - 4.0 * std::numbers::pi;
    EXPECT(std::fabs(geobool::scene_area(scene) - expected) <= 0.005 * expected,
           "square-minus-circle area off by more than 0.5%");
  }

  std::mt19937 rng(31337u);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  for (int scene_i = 0; scene_i < 100; ++scene_i) {
    Model m;
    StructureId root = m.add_root("root", StructureType::Solid);
    std::vector<Prim> prims;

    // a generous base plate keeps the covered fraction healthy
    Prim base;
    base.is_rect = true;
    base.x0 = 0;
    base.y0 = 0;
    base.x1 = uni(10, 16);
    base.y1 = uni(10, 16);
    m.add_rectangle(root, "base", 0, 0, base.x1, base.y1);
    prims.push_back(base);

    int extra = 1 + scene_i % 5;  // 2..6 primitives total
    for (int k = 0; k < extra; ++k) {
      bool hole = (k + scene_i) % 2 == 1;
      bool circle = uni(0, 1) < 0.5;
      std::string child_name = (hole ? "h" : "s") + std::to_string(k);
      StructureId child = m.add_structure(root, child_name,
                                          hole ? StructureType::Hole : StructureType::Solid);
      Prim p;
      p.hole = hole;
      if (circle) {
        p.cx = uni(1, base.x1 - 1);
        p.cy = uni(1, base.y1 - 1);
        p.r = uni(1.5, 3.5);
        GeoId c = m.add_point(child, "c", p.cx, p.cy);
        m.add_circle(child, "k", c, p.r);
      } else {
        p.is_rect = true;
        double w = uni(2, 6), h = uni(2, 6);
        p.x0 = uni(-2, base.x1 - 2);
        p.y0 = uni(-2, base.y1 - 2);
        p.x1 = p.x0 + w;
        p.y1 = p.y0 + h;
        m.add_rectangle(child, "r", p.x0, p.y0, w, h);
      }
      prims.push_back(p);
    }
    m.flatten_compounds(root);
    geobool::GeoboolConfig gcfg;
    auto scene = geobool::build_scene(m, gcfg);
    double area = geobool::scene_area(scene);

    // stratified (jittered-grid) membership sampling, 10^6 points
    double minx = 1e9, miny = 1e9, maxx = -1e9, maxy = -1e9;
    for (const Prim& p : prims) {
      double px0 = p.is_rect ? p.x0 : p.cx - p.r;
      double py0 = p.is_rect ? p.y0 : p.cy - p.r;
      double px1 = p.is_rect ? p.x1 : p.cx + p.r;
      double py1 = p.is_rect ? p.y1 : p.cy + p.r;
      minx = std::min(minx, px0);
      miny = std::min(miny, py0);
      maxx = std::max(maxx, px1);
      maxy = std::max(maxy, py1);
    }
    const int grid = 1000;
    double dx = (maxx - minx) / grid, dy = (maxy - miny) / grid;
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    long long inside = 0;
    for (int gy = 0; gy < grid; ++gy) {
      for (int gx = 0; gx < grid; ++gx) {
        double x = minx + (gx + jitter(rng)) * dx;
        double y = miny + (gy + jitter(rng)) * dy;
        bool solid = false, hole = false;
        for (const Prim& p : prims) {
          if (!p.contains(x, y)) continue;
          if (p.hole) hole = true;
          else solid = true;
        }
        if (solid && !hole) ++inside;
      }
    }
    double mc = (maxx - minx) * (maxy - miny) * static_cast<double>(inside) / (1e6);
    EXPECT(std::fabs(area - mc) <= 0.005 * std::max(mc, 1.0),
           "scene " + std::to_string(scene_i) + ": tessellated area " + std::to_string(area) +
               " vs oracle " + std::to_string(mc));
  }
}

// --- 8: phone handset reproduction ---------------------------------------------

void criterion_phone_handset() {
  engine::RunConfig cfg;
  std::string constrained = slurp(fs::path(AIDL_CORPUS_DIR) / "phone_handset.aidl");
  auto res = engine::solve("phone_handset.aidl", constrained, cfg);
  EXPECT(res.exit_code == engine::kExitOk, "handset did not solve");

  int coincident = 0, tangent = 0, equal = 0;
  for (StructureId s = 0; s < res.model->structure_count(); ++s) {
    for (const auto& lc : res.model->structure(s).lowered) {
      if (lc.kind != LoweredKind::UserConstraint) continue;
      bool tracked = lc.canonical == "Coincident" || lc.canonical == "Tangent" ||
                     lc.canonical == "Equal";
      if (!tracked) continue;
      if (lc.canonical == "Coincident") ++coincident;
      if (lc.canonical == "Tangent") ++tangent;
      if (lc.canonical == "Equal") ++equal;
      for (ExprId r : lc.residuals) {
        double v = eval(res.model->pool(), r, res.model->values());
        EXPECT(std::fabs(v) <= 1e-6,
               lc.canonical + " residual " + std::to_string(v) + " above 1e-6");
      }
    }
  }
  EXPECT(coincident >= 2 && tangent >= 2 && equal >= 2,
         "handset lost its Coincident/Tangent/Equal constraints");

  // before/after contrast: the unconstrained authoring renders differently
  auto with = engine::render("phone_handset.aidl", constrained, cfg);
  EXPECT(with.exit_code == engine::kExitOk, "constrained render failed");
  std::string loose_src = slurp(fs::path(AIDL_CORPUS_DIR) / "phone_handset_unconstrained.aidl");
  auto loose = engine::render("phone_handset_unconstrained.aidl", loose_src, cfg);
  EXPECT(loose.exit_code == engine::kExitOk, "unconstrained render failed");
  EXPECT(with.svg != loose.svg, "constraints made no visible difference");
}

// --- 9: parser round-trip + invalid fixtures -------------------------------------

void criterion_round_trip() {
  for (const fs::path& p : corpus_programs()) {
    std::string src = slurp(p);
    auto parsed = lang::parse(src, p.filename().string());
    EXPECT(parsed.unit.root != nullptr, p.filename().string() + " failed to parse");
    auto el1 = lang::elaborate(parsed.unit, p.filename().string());
    EXPECT(!has_errors(el1.diagnostics), p.filename().string() + " failed to elaborate");
    std::string f1 = lang::format(*el1.model);

    auto reparsed = lang::parse(f1, "formatted");
    EXPECT(reparsed.unit.root != nullptr, p.filename().string() + ": formatted text failed to parse");
    auto el2 = lang::elaborate(reparsed.unit, "formatted");
    EXPECT(!has_errors(el2.diagnostics),
           p.filename().string() + ": formatted text failed to elaborate");
    std::string f2 = lang::format(*el2.model);
    EXPECT(f1 == f2, p.filename().string() + ": canonical form is not a fixed point");
    EXPECT(el1.model->structure_count() == el2.model->structure_count(),
           "structure count changed across the round trip");
    EXPECT(el1.model->param_count() == el2.model->param_count(),
           "parameter count changed across the round trip");
    for (ParamId q = 0; q < el1.model->param_count(); ++q)
      EXPECT(el1.model->value(q) == el2.model->value(q),
             "parameter init drifted across the round trip");
  }

  const std::map<std::string, std::string> expected_codes = {
      {"rotate_constraint.aidl", "E0005"},
      {"syntax_error.aidl", "E0001"},
      {"duplicate_name.aidl", "E0003"},
      {"cross_structure_line.aidl", "E0007"},
      {"bad_arity.aidl", "E0006"},
      {"name_resolution.aidl", "E0002"},
      {"self_reference.aidl", "E0008"},
  };
  engine::RunConfig cfg;
  for (const auto& [name, code] : expected_codes) {
    fs::path p = fs::path(AIDL_CORPUS_DIR) / "invalid" / name;
    auto res = engine::check(name, slurp(p), cfg);
    EXPECT(res.exit_code == engine::kExitValidation, name + " was not rejected");
    bool found = false;
    for (const auto& d : res.diagnostics)
      if (d.code == code) found = true;
    EXPECT(found, name + " missing diagnostic " + code);
    if (name == "rotate_constraint.aidl") {
      bool suggestion = false;
      for (const auto& d : res.diagnostics)
        if (d.message.find("Angle") != std::string::npos) suggestion = true;
      EXPECT(suggestion, "Rotate fixture lost its Angle suggestion");
    }
  }
}

// --- 10: determinism ---------------------------------------------------------------

void criterion_determinism() {
  engine::RunConfig cfg;
  for (const fs::path& p : corpus_programs()) {
    std::string src = slurp(p);
    auto s1 = engine::solve(p.filename().string(), src, cfg);
    auto s2 = engine::solve(p.filename().string(), src, cfg);
    EXPECT(s1.exit_code == engine::kExitOk, p.filename().string() + " did not solve");
    EXPECT(s1.model_json == s2.model_json,
           p.filename().string() + ": solve output not byte-identical");
    auto r1 = engine::render(p.filename().string(), src, cfg);
    auto r2 = engine::render(p.filename().string(), src, cfg);
    EXPECT(r1.svg == r2.svg, p.filename().string() + ": render output not byte-identical");
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void()> run;
  };
  const Criterion criteria[] = {
      {"1. derivative oracle: symbolic vs central differences", criterion_derivative_oracle},
      {"2. slack soundness on randomized inequality models", criterion_slack_soundness},
      {"3. iterated-Newton bounding-box branch flip", criterion_branch_flip},
      {"4. substructure preservation under translation solves", criterion_substructure_preservation},
      {"5. deepening escalates to the geometric stage", criterion_deepening_escalation},
      {"6. angle convention disambiguation on mirrored inits", criterion_angle_convention},
      {"7. boolean faces vs membership oracle", criterion_boolean_oracle},
      {"8. phone handset reproduction", criterion_phone_handset},
      {"9. parser round-trip and invalid fixtures", criterion_round_trip},
      {"10. byte-identical repeated solves and renders", criterion_determinism},
  };

  auto t0 = std::chrono::steady_clock::now();
  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      c.run();
      std::cout << "[PASS] " << c.name << "\n";
    } catch (const Fail& f) {
      ++failures;
      std::cout << "[FAIL] " << c.name << " — " << f.detail << "\n";
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "[FAIL] " << c.name << " — unexpected exception: " << e.what() << "\n";
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d/10 criteria passed in %.1fs\n", 10 - failures, secs);
  return failures == 0 ? 0 : 1;
}
