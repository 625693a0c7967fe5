#include "hkquad/propcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hkquad/division.hpp"
#include "hkquad/kahan.hpp"

namespace hk {

std::string to_string(CheckId id) {
  switch (id) {
    case CheckId::levi: return "levi";
    case CheckId::fatou: return "fatou";
    case CheckId::dominated: return "dominated";
    case CheckId::holder: return "holder";
    case CheckId::minkowski: return "minkowski";
    case CheckId::additivity: return "additivity";
    case CheckId::henstock: return "henstock";
    case CheckId::fubini_consistency: return "fubini_consistency";
    case CheckId::by_parts_identity: return "by_parts_identity";
  }
  return "?";
}

bool CorpusEntry::has_tag(const std::string& t) const {
  return std::find(tags.begin(), tags.end(), t) != tags.end();
}

bool Report::all_passed() const {
  for (const auto& r : rows)
    if (r.verdict == Verdict::fail) return false;
  return true;
}

namespace {

PointIntegrand fn(std::function<double(double)> f) {
  return PointIntegrand{[f = std::move(f)](const Point& p) { return f(p[0]); }, {}};
}

CheckRow make_row(CheckId id, std::string name, double lhs, double rhs, double margin,
                  double tol, bool pass, const IntegralResult* diag = nullptr,
                  std::string note = "") {
  CheckRow row;
  row.id = id;
  row.case_name = std::move(name);
  row.lhs = lhs;
  row.rhs = rhs;
  row.margin = margin;
  row.tolerance = tol;
  row.verdict = pass ? Verdict::pass : Verdict::fail;
  if (diag) {
    row.evaluations = diag->evaluations;
    row.refinements = diag->refinements;
  }
  row.note = std::move(note);
  return row;
}

// Linear Richardson extrapolation of a monotone family truncated at r = 64:
// with values at r = 16, 32, 64 and an O(1/r) deficit, 2 v(64) - v(32)
// removes the leading term.
double extrapolate_family(const std::function<double(int)>& value_at) {
  double v32 = value_at(32);
  double v64 = value_at(64);
  return 2.0 * v64 - v32;
}

std::vector<CheckRow> check_levi(const TheoremCheck& c, const std::vector<CorpusEntry>& corpus) {
  std::vector<CheckRow> rows;
  for (const auto& e : corpus) {
    if (!e.has_tag("family") || !e.has_tag("monotone")) continue;
    std::vector<double> vals;
    IntegralResult last;
    for (int r : {16, 32, 64}) {
      last = integrate(e.make(r), e.domain, 1e-7);
      vals.push_back(last.value);
    }
    bool monotone = vals[0] <= vals[1] + 1e-9 && vals[1] <= vals[2] + 1e-9;
    if (!monotone) {
      CheckRow row;
      row.id = c.id;
      row.case_name = e.name;
      row.verdict = Verdict::skipped;
      row.note = "family not monotone at sampled r";
      rows.push_back(row);
      continue;
    }
    double lim_est = 2.0 * vals[2] - vals[1];
    // The limit integrand, integrated on its own (singular points declared by
    // the family constructor at r = 0 by convention).
    IntegralResult lim = integrate(e.make(0), e.domain, 1e-6);
    double diff = std::abs(lim.value - lim_est);
    rows.push_back(make_row(c.id, e.name, lim.value, lim_est, c.tolerance - diff, c.tolerance,
                            diff <= c.tolerance && lim.converged(), &last,
                            "lim integral vs extrapolated family limit"));
  }
  return rows;
}

std::vector<CheckRow> check_fatou(const TheoremCheck& c, const std::vector<CorpusEntry>&) {
  // f_j alternating between x and 1-x; liminf integrand is min(x, 1-x).
  IntegralResult liminf_int =
      integrate(fn([](double x) { return std::min(x, 1.0 - x); }), Brick(0.0, 1.0), 1e-8);
  IntegralResult ix = integrate(fn([](double x) { return x; }), Brick(0.0, 1.0), 1e-8);
  IntegralResult i1x = integrate(fn([](double x) { return 1.0 - x; }), Brick(0.0, 1.0), 1e-8);
  double liminf_of_ints = std::min(ix.value, i1x.value);
  bool pass = liminf_int.value <= liminf_of_ints + c.tolerance;
  return {make_row(c.id, "alternating x / 1-x", liminf_int.value, liminf_of_ints,
                   liminf_of_ints + c.tolerance - liminf_int.value, c.tolerance, pass,
                   &liminf_int, "int liminf <= liminf int")};
}

std::vector<CheckRow> check_dominated(const TheoremCheck& c, const std::vector<CorpusEntry>& corpus) {
  std::vector<CheckRow> rows;
  for (const auto& e : corpus) {
    if (!e.has_tag("family") || !e.has_tag("dominated")) continue;
    IntegralResult last;
    auto value_at = [&](int r) {
      last = integrate(e.make(r), e.domain, 1e-9);
      return last.value;
    };
    double lim_est = extrapolate_family(value_at);
    IntegralResult lim = integrate(e.make(0), e.domain, 1e-9);
    double diff = std::abs(lim.value - lim_est);
    rows.push_back(make_row(c.id, e.name, lim.value, lim_est, c.tolerance - diff, c.tolerance,
                            diff <= c.tolerance, &last, "int lim vs lim int under g1<=f_j<=g2"));
  }
  return rows;
}

std::vector<CheckRow> check_holder(const TheoremCheck& c, const std::vector<CorpusEntry>&) {
  std::vector<CheckRow> rows;
  auto run_case = [&](const std::string& name, std::function<double(double)> f,
                      std::function<double(double)> g, double p, bool equality_case) {
    double q = p / (p - 1.0);
    Brick dom(0.0, 1.0);
    IntegralResult fg = integrate(fn([f, g](double x) { return f(x) * g(x); }), dom, 1e-9);
    IntegralResult fp = integrate(fn([f, p](double x) { return std::pow(f(x), p); }), dom, 1e-9);
    IntegralResult gq = integrate(fn([g, q](double x) { return std::pow(g(x), q); }), dom, 1e-9);
    double rhs = std::pow(fp.value, 1.0 / p) * std::pow(gq.value, 1.0 / q);
    bool pass = fg.value <= rhs + c.tolerance;
    std::string note = "int fg <= (int f^p)^(1/p) (int g^q)^(1/q)";
    if (equality_case) {
      pass = pass && std::abs(rhs - fg.value) <= 2.0 * c.tolerance;
      note += "; equality case margin within 2 tol";
    }
    rows.push_back(
        make_row(c.id, name, fg.value, rhs, rhs + c.tolerance - fg.value, c.tolerance, pass, &fg, note));
  };
  run_case("f=x, g=1-x, p=2", [](double x) { return x; }, [](double x) { return 1.0 - x; },
           2.0, false);
  run_case("f=g=x, p=2 (equality)", [](double x) { return x; }, [](double x) { return x; },
           2.0, true);
  run_case("f=x, g=exp(x), p=3", [](double x) { return x; },
           [](double x) { return std::exp(x); }, 3.0, false);
  return rows;
}

std::vector<CheckRow> check_minkowski(const TheoremCheck& c, const std::vector<CorpusEntry>&) {
  std::vector<CheckRow> rows;
  auto run_case = [&](const std::string& name, std::function<double(double)> f,
                      std::function<double(double)> g, double p) {
    Brick dom(0.0, 1.0);
    IntegralResult fgp =
        integrate(fn([f, g, p](double x) { return std::pow(f(x) + g(x), p); }), dom, 1e-9);
    IntegralResult fp = integrate(fn([f, p](double x) { return std::pow(f(x), p); }), dom, 1e-9);
    IntegralResult gp = integrate(fn([g, p](double x) { return std::pow(g(x), p); }), dom, 1e-9);
    double lhs = std::pow(fgp.value, 1.0 / p);
    double rhs = std::pow(fp.value, 1.0 / p) + std::pow(gp.value, 1.0 / p);
    bool pass = lhs <= rhs + c.tolerance;
    rows.push_back(make_row(c.id, name, lhs, rhs, rhs + c.tolerance - lhs, c.tolerance, pass,
                            &fgp, "p-norm triangle inequality"));
  };
  run_case("f=x, g=1-x, p=2", [](double x) { return x; }, [](double x) { return 1.0 - x; }, 2.0);
  run_case("f=x^2, g=sin(x), p=3", [](double x) { return x * x; },
           [](double x) { return std::sin(x); }, 3.0);
  return rows;
}

std::vector<CheckRow> check_additivity(const TheoremCheck& c,
                                       const std::vector<CorpusEntry>& corpus) {
  std::vector<CheckRow> rows;
  std::uint64_t state = 0x243f6a8885a308d3ull;
  auto next_split = [&state]() {
    state = detail::splitmix64(state);
    return 0.1 + 0.8 * (static_cast<double>(state >> 11) * 0x1.0p-53);
  };
  for (const auto& e : corpus) {
    if (!e.has_tag("smooth") && !e.has_tag("oscillatory")) continue;
    PointIntegrand f = e.make(0);
    const double a = e.domain.lo[0], b = e.domain.hi[0];
    double u = next_split();
    double cpt = a + u * (b - a);
    IntegralResult whole = integrate(f, e.domain, 1e-8);
    IntegralResult left = integrate(f, Brick(a, cpt), 1e-8);
    IntegralResult right = integrate(f, Brick(cpt, b), 1e-8);
    double lhs = std::abs(whole.value - (left.value + right.value));
    double rhs = whole.err_estimate + left.err_estimate + right.err_estimate;
    rows.push_back(make_row(c.id, e.name + " split", lhs, rhs, rhs - lhs, c.tolerance,
                            lhs <= rhs, &whole, "|I(a,b) - I(a,c) - I(c,b)| within errors"));
  }
  return rows;
}

std::vector<CheckRow> check_henstock(const TheoremCheck& c, const std::vector<CorpusEntry>&) {
  // Convex-curvature polynomials with exact antiderivatives; the residual of
  // the final division must stay within the Henstock factor of the budget.
  std::vector<CheckRow> rows;
  std::uint64_t state = 0x13198a2e03707344ull;
  auto uniform = [&state]() {
    state = detail::splitmix64(state);
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  const double tol = 1e-6;
  for (int case_i = 0; case_i < 20; ++case_i) {
    double a0 = -1.0 + 2.0 * uniform();
    double a1 = -2.0 + 4.0 * uniform();
    double a2 = 0.1 + 2.0 * uniform();
    double a3 = 0.1 + 1.0 * uniform();
    double lo = -1.0 + uniform();
    double hi = lo + 0.5 + 1.5 * uniform();
    auto F1 = [=](double x) {
      return a0 * x + a1 * x * x / 2 + a2 * x * x * x / 3 + a3 * x * x * x * x / 4;
    };
    PointIntegrand f = fn([=](double x) { return a0 + x * (a1 + x * (a2 + x * a3)); });
    DriverArtifacts art =
        integrate_with_artifacts(f, Brick(lo, hi), tol, {}, /*materialize_division=*/true);
    if (!art.result.converged() || !art.final_division) {
      CheckRow row;
      row.id = c.id;
      row.case_name = "poly case " + std::to_string(case_i);
      row.verdict = Verdict::skipped;
      row.note = "driver did not converge or division too large";
      rows.push_back(row);
      continue;
    }
    HenstockResidual res = henstock_residual(
        f, [&](const Brick& b) { return F1(b.hi[0]) - F1(b.lo[0]); }, *art.final_division);
    double gap = std::max(art.result.err_estimate - tol / 2, 0.0);
    double budget = 4.0 * gap + 4.0 * tol;
    rows.push_back(make_row(c.id, "poly case " + std::to_string(case_i), res.abs_sum, budget,
                            budget - res.abs_sum, tol, res.abs_sum <= budget, &art.result,
                            "abs residual <= 4 gap + 4 tol"));
  }
  return rows;
}

std::vector<CheckRow> check_fubini(const TheoremCheck& c, const std::vector<CorpusEntry>&) {
  PointIntegrand f{[](const Point& p) { return p[0] * p[1]; }, {}};
  FubiniResult r = fubini(f, Brick(0.0, 1.0), Brick(0.0, 1.0), 1e-8);
  double worst = std::max({std::abs(r.dbl.value - 0.25), std::abs(r.iterated_xy.value - 0.25),
                           std::abs(r.iterated_yx.value - 0.25)});
  bool pass = worst <= c.tolerance && r.dbl.converged();
  return {make_row(c.id, "x*y on [0,1]^2", worst, c.tolerance, c.tolerance - worst,
                   c.tolerance, pass, &r.dbl, "double and both iterated integrals at 1/4")};
}

std::vector<CheckRow> check_by_parts(const TheoremCheck& c, const std::vector<CorpusEntry>&) {
  ByPartsResult r = by_parts([](double x) { return x; }, [](double x) { return x * x; },
                             Brick(0.0, 1.0), 1e-7);
  double lhs = std::abs(r.f_dg.value + r.g_df.value - r.boundary);
  bool pass = r.identity_holds && std::abs(r.f_dg.value - 2.0 / 3.0) < 1e-5 &&
              std::abs(r.g_df.value - 1.0 / 3.0) < 1e-5;
  return {make_row(c.id, "f=x, g=x^2 on [0,1]", lhs, 3e-7, 3e-7 - lhs, c.tolerance, pass,
                   &r.f_dg, "int f dg + int g df = [fg]")};
}

}  // namespace

std::vector<CorpusEntry> default_corpus() {
  std::vector<CorpusEntry> out;
  auto add = [&](std::string name, std::function<PointIntegrand(int)> make,
                 std::vector<std::string> tags, Brick dom, std::optional<double> known,
                 std::string prov) {
    out.push_back({std::move(name), std::move(make), std::move(tags), dom, known,
                   std::move(prov)});
  };
  add("x^2", [](int) { return fn([](double x) { return x * x; }); }, {"smooth"},
      Brick(0.0, 1.0), 1.0 / 3.0, "closed-form");
  add("cubic", [](int) { return fn([](double x) { return 1.0 + x * (0.5 + x * (2.0 + x)); }); },
      {"smooth"}, Brick(0.0, 1.0), 1.0 + 0.25 + 2.0 / 3.0 + 0.25, "closed-form");
  add("sin", [](int) { return fn([](double x) { return std::sin(x); }); }, {"smooth"},
      Brick(0.0, 1.0), 1.0 - std::cos(1.0), "closed-form");
  add("exp", [](int) { return fn([](double x) { return std::exp(x); }); }, {"smooth"},
      Brick(0.0, 1.0), std::exp(1.0) - 1.0, "closed-form");
  add("runge", [](int) { return fn([](double x) { return 1.0 / (1.0 + 25.0 * x * x); }); },
      {"smooth"}, Brick(-1.0, 1.0), 0.4 * std::atan(5.0), "closed-form");
  add("kink", [](int) { return fn([](double x) { return std::abs(x - 1.0 / 3.0); }); },
      {"smooth"}, Brick(0.0, 1.0), 5.0 / 18.0, "closed-form");
  add("osc20", [](int) { return fn([](double x) { return std::sin(20.0 * x); }); },
      {"oscillatory"}, Brick(0.0, 1.0), (1.0 - std::cos(20.0)) / 20.0, "closed-form");
  add("inv_sqrt",
      [](int) {
        PointIntegrand f = fn([](double x) { return 1.0 / std::sqrt(x); });
        f.singular_points = {Point{0.0}};
        return f;
      },
      {"singular"}, Brick(0.0, 1.0), 2.0, "paper-stated");
  add("min_inv_sqrt_family",
      [](int r) {
        if (r == 0) {  // the family limit
          PointIntegrand f = fn([](double x) { return 1.0 / std::sqrt(x); });
          f.singular_points = {Point{0.0}};
          return f;
        }
        double cap = r;
        return fn([cap](double x) { return std::min(1.0 / std::sqrt(x), cap); });
      },
      {"family", "monotone"}, Brick(0.0, 1.0), 2.0, "paper-stated");
  add("exp_decay_family",
      [](int r) {
        if (r == 0) return fn([](double) { return 0.0; });  // pointwise limit a.e.
        double j = r;
        return fn([j](double x) { return std::exp(-j * x); });
      },
      {"family", "dominated"}, Brick(0.0, 1.0), 0.0, "closed-form");
  return out;
}

std::vector<CheckRow> run_check(const TheoremCheck& c, const std::vector<CorpusEntry>& corpus) {
  std::vector<CorpusEntry> filtered;
  for (const auto& e : corpus) {
    bool ok = true;
    for (const auto& t : c.corpus_filter) ok = ok && e.has_tag(t);
    if (ok) filtered.push_back(e);
  }
  switch (c.id) {
    case CheckId::levi: return check_levi(c, filtered);
    case CheckId::fatou: return check_fatou(c, filtered);
    case CheckId::dominated: return check_dominated(c, filtered);
    case CheckId::holder: return check_holder(c, filtered);
    case CheckId::minkowski: return check_minkowski(c, filtered);
    case CheckId::additivity: return check_additivity(c, filtered);
    case CheckId::henstock: return check_henstock(c, filtered);
    case CheckId::fubini_consistency: return check_fubini(c, filtered);
    case CheckId::by_parts_identity: return check_by_parts(c, filtered);
  }
  return {};
}

Report run_default_suite() {
  Report rep;
  auto corpus = default_corpus();
  const std::vector<TheoremCheck> checks = {
      {CheckId::levi, {}, 1e-3},      {CheckId::fatou, {}, 1e-6},
      {CheckId::dominated, {}, 1e-3}, {CheckId::holder, {}, 1e-6},
      {CheckId::minkowski, {}, 1e-6}, {CheckId::additivity, {}, 0.0},
      {CheckId::henstock, {}, 1e-6},  {CheckId::fubini_consistency, {}, 3e-8},
      {CheckId::by_parts_identity, {}, 1e-7},
  };
  for (const auto& c : checks) {
    auto rows = run_check(c, corpus);
    rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
  }
  return rep;
}

std::string report_text(const Report& report) {
  std::ostringstream os;
  os << "check                case                            lhs            rhs            "
        "margin        verdict\n";
  os.precision(9);
  for (const auto& r : report.rows) {
    os.width(21);
    os << std::left << to_string(r.id);
    os.width(32);
    os << std::left << r.case_name.substr(0, 31);
    os.width(15);
    os << r.lhs;
    os.width(15);
    os << r.rhs;
    os.width(14);
    os << r.margin;
    os << (r.verdict == Verdict::pass ? "pass" : r.verdict == Verdict::fail ? "FAIL" : "skipped");
    if (!r.note.empty()) os << "  # " << r.note;
    os << "\n";
  }
  return os.str();
}

}  // namespace hk
