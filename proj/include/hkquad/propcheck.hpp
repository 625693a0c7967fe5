#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hkquad/integrand.hpp"
#include "hkquad/integrate.hpp"

namespace hk {

enum class CheckId {
  levi,
  fatou,
  dominated,
  holder,
  minkowski,
  additivity,
  henstock,
  fubini_consistency,
  by_parts_identity,
};

std::string to_string(CheckId id);

struct TheoremCheck {
  CheckId id;
  std::vector<std::string> corpus_filter;  // tags an entry must carry
  double tolerance = 1e-6;
};

/// A corpus integrand, possibly a parameterized family f_r. known_value
/// provenance is either "closed-form" or "paper-stated".
struct CorpusEntry {
  std::string name;
  std::function<PointIntegrand(int r)> make;  // fixed entries ignore r
  std::vector<std::string> tags;              // smooth | singular | oscillatory | family | ...
  Brick domain{0.0, 1.0};
  std::optional<double> known_value;
  std::string provenance;

  bool has_tag(const std::string& t) const;
};

enum class Verdict { pass, fail, skipped };

struct CheckRow {
  CheckId id;
  std::string case_name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // slack left before the check would fail
  double tolerance = 0.0;
  Verdict verdict = Verdict::skipped;
  long evaluations = 0;
  int refinements = 0;
  std::string note;
};

struct Report {
  std::vector<CheckRow> rows;
  bool all_passed() const;
};

std::vector<CorpusEntry> default_corpus();

/// Runs one named check against the corpus; rows come back in a fixed order.
std::vector<CheckRow> run_check(const TheoremCheck& c, const std::vector<CorpusEntry>& corpus);

/// The shipped default suite with pinned tolerances.
Report run_default_suite();

/// Deterministic plain-text rendering (one row per line plus a header).
std::string report_text(const Report& report);

}  // namespace hk
