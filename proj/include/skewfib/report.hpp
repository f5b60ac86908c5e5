#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "skewfib/numeric.hpp"
#include "skewfib/sampling.hpp"

namespace skewfib {

/// pass is reserved for exact tests. Sampling can only produce evidence.
enum class Verdict { pass, fail, evidence_only };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::evidence_only: return "evidence-only";
  }
  return "unknown";
}

struct Witness {
  std::string label;
  std::vector<Vec> inputs;
  double value = 0.0;
};

struct SamplingInfo {
  std::uint64_t seed = 0;
  std::uint64_t count = 0;
  double radius = 0.0;
  SampleMode mode = SampleMode::pseudo_random;
};

struct VerificationReport {
  std::string check;
  Verdict verdict = Verdict::evidence_only;
  double margin = 0.0;
  bool exact = false;
  std::vector<Witness> witnesses;
  SamplingInfo sampling;
  std::map<std::string, double> details;
  std::vector<std::string> notes;

  bool failed() const { return verdict == Verdict::fail; }
  bool ok() const { return verdict != Verdict::fail; }

  void fail_with(Witness w) {
    verdict = Verdict::fail;
    witnesses.push_back(std::move(w));
  }
};

}  // namespace skewfib
