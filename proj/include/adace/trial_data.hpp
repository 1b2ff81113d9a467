/*
 * Copyright 2026 The adace Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Trial data model: one record per randomized subject with baseline
// covariates X, intermediate measurements Z(1..K-1), adherence flags
// I(1..K-1) and final outcome Y. Missing cells are std::nullopt.

#include <array>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "adace/common.hpp"

namespace adace {

enum class StratumLabel {
  SStarPlus,  ///< would adhere to the experimental treatment: A(1) = 1
  SPlusStar,  ///< would adhere to control: A(0) = 1
  SPlusPlus,  ///< would adhere to both
};

inline const char* to_string(StratumLabel s) {
  switch (s) {
    case StratumLabel::SStarPlus: return "S*+";
    case StratumLabel::SPlusStar: return "S+*";
    case StratumLabel::SPlusPlus: return "S++";
  }
  return "?";
}

struct SubjectRecord {
  std::string subject_id;
  int arm = 0;
  std::vector<std::optional<double>> x;
  std::vector<std::optional<double>> z;
  std::vector<std::optional<int>> i_flags;
  std::optional<double> y;

  bool operator==(const SubjectRecord&) const = default;
};

/// Immutable collection of subjects sharing covariate count p and visit
/// schedule K (K-1 intermediate assessments).
class TrialDataset {
 public:
  TrialDataset() = default;

  TrialDataset(std::vector<SubjectRecord> records, std::size_t p, std::size_t K)
      : records_(std::move(records)), p_(p), K_(K) {
    if (K_ < 2) throw Error("K must be at least 2");
    std::unordered_set<std::string> ids;
    for (const auto& r : records_) {
      if (r.x.size() != p_ || r.z.size() != K_ - 1 || r.i_flags.size() != K_ - 1)
        throw Error("subject " + r.subject_id + ": field count does not match p/K");
      if (r.arm != 0 && r.arm != 1)
        throw Error("subject " + r.subject_id + ": arm must be 0 or 1");
      if (!ids.insert(r.subject_id).second)
        throw Error("duplicate subject_id " + r.subject_id);
      (r.arm == 0 ? n0_ : n1_)++;
    }
  }

  const std::vector<SubjectRecord>& records() const noexcept { return records_; }
  const SubjectRecord& operator[](std::size_t j) const { return records_[j]; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t p() const noexcept { return p_; }
  std::size_t K() const noexcept { return K_; }
  std::size_t periods() const noexcept { return K_ - 1; }
  std::size_t n0() const noexcept { return n0_; }
  std::size_t n1() const noexcept { return n1_; }
  std::size_t arm_size(int arm) const noexcept { return arm == 0 ? n0_ : n1_; }

  bool operator==(const TrialDataset&) const = default;

 private:
  std::vector<SubjectRecord> records_;
  std::size_t p_ = 0;
  std::size_t K_ = 2;
  std::size_t n0_ = 0;
  std::size_t n1_ = 0;
};

enum class Provenance : unsigned char { Observed, Imputed };

/// Potential outcomes of one subject under one hypothetical treatment.
struct PotentialArm {
  std::vector<double> z;
  std::vector<int> i;
  int a = 0;
  double y = 0.0;
  std::vector<Provenance> z_prov;
  std::vector<Provenance> i_prov;
  Provenance y_prov = Provenance::Observed;
};

struct PotentialOutcomeFrame {
  std::array<PotentialArm, 2> under;  ///< indexed by hypothetical treatment t
};

// ---------------------------------------------------------------------------
// Validation

enum class Rule {
  kMissingCovariate,
  kMissingFirstIntermediate,
  kMissingFirstAdherence,
  kInvalidAdherenceValue,
  kNonMonotoneAdherence,
  kMissingWhileAdherent,
  kDataAfterDropout,
  kMissingOutcome,
};

inline const char* to_string(Rule r) {
  switch (r) {
    case Rule::kMissingCovariate: return "missing baseline covariate";
    case Rule::kMissingFirstIntermediate: return "first intermediate measurement missing";
    case Rule::kMissingFirstAdherence: return "first adherence flag missing";
    case Rule::kInvalidAdherenceValue: return "adherence flag not in {0,1}";
    case Rule::kNonMonotoneAdherence: return "non-monotone adherence";
    case Rule::kMissingWhileAdherent: return "value missing while subject adherent";
    case Rule::kDataAfterDropout: return "data present after dropout";
    case Rule::kMissingOutcome: return "outcome missing for adherent subject";
  }
  return "?";
}

struct Violation {
  std::string subject_id;
  Rule rule;
  std::string detail;
};

inline std::vector<Violation> validate(const SubjectRecord& r) {
  std::vector<Violation> out;
  auto flag = [&](Rule rule, std::string detail) {
    for (const auto& v : out)
      if (v.rule == rule) return;
    out.push_back({r.subject_id, rule, std::move(detail)});
  };

  for (std::size_t j = 0; j < r.x.size(); ++j)
    if (!r.x[j]) flag(Rule::kMissingCovariate, "x" + std::to_string(j + 1));

  const std::size_t periods = r.z.size();
  if (periods == 0) return out;
  if (!r.z[0]) flag(Rule::kMissingFirstIntermediate, "z1");

  // at_risk: every earlier flag was an observed 1
  bool at_risk = true;
  for (std::size_t k = 0; k < periods; ++k) {
    const std::string col = std::to_string(k + 1);
    const auto& ik = r.i_flags[k];
    if (ik && *ik != 0 && *ik != 1) {
      flag(Rule::kInvalidAdherenceValue, "i" + col);
      at_risk = false;
      continue;
    }
    if (at_risk) {
      if (k > 0 && !r.z[k]) flag(Rule::kMissingWhileAdherent, "z" + col);
      if (!ik) {
        flag(k == 0 ? Rule::kMissingFirstAdherence : Rule::kMissingWhileAdherent, "i" + col);
        at_risk = false;
      } else if (*ik == 0) {
        at_risk = false;
      }
    } else {
      if (r.z[k]) flag(Rule::kDataAfterDropout, "z" + col);
      if (ik && *ik == 1) flag(Rule::kNonMonotoneAdherence, "i" + col);
    }
  }
  if (at_risk && !r.y) flag(Rule::kMissingOutcome, "y");
  if (!at_risk && r.y) flag(Rule::kDataAfterDropout, "y");
  return out;
}

inline std::vector<Violation> validate(const TrialDataset& ds) {
  std::vector<Violation> out;
  for (const auto& r : ds.records()) {
    auto v = validate(r);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

/// Observed adherence A = prod_k I(k). A flag that is missing after an
/// explicit 0 counts as 0.
inline int adherence(const SubjectRecord& r) {
  if (r.i_flags.empty() || !r.i_flags[0])
    throw Error("subject " + r.subject_id + ": first adherence flag missing");
  for (const auto& ik : r.i_flags) {
    if (!ik) throw Error("subject " + r.subject_id + ": adherence flag missing while at risk");
    if (*ik == 0) return 0;
  }
  return 1;
}

// ---------------------------------------------------------------------------
// CSV: subject_id,arm,x1..xp,z1..z{K-1},i1..i{K-1},y ; empty field = missing

namespace detail {

inline std::string csv_header(std::size_t p, std::size_t periods) {
  std::string h = "subject_id,arm";
  for (std::size_t j = 1; j <= p; ++j) h += ",x" + std::to_string(j);
  for (std::size_t k = 1; k <= periods; ++k) h += ",z" + std::to_string(k);
  for (std::size_t k = 1; k <= periods; ++k) h += ",i" + std::to_string(k);
  h += ",y";
  return h;
}

}  // namespace detail

inline TrialDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty input, header required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto cols = split_view(line, ',');
  std::size_t p = 0, nz = 0, ni = 0;
  for (auto c : cols) {
    if (c.size() > 1 && c[0] == 'x' && parse_int<int>(c.substr(1))) ++p;
    if (c.size() > 1 && c[0] == 'z' && parse_int<int>(c.substr(1))) ++nz;
    if (c.size() > 1 && c[0] == 'i' && parse_int<int>(c.substr(1))) ++ni;
  }
  if (nz != ni || nz == 0 || detail::csv_header(p, nz) != line)
    throw ParseError(1, "header must be subject_id,arm,x1..xp,z1..z{K-1},i1..i{K-1},y");
  const std::size_t periods = nz;
  const std::size_t ncols = 3 + p + 2 * periods;

  std::vector<SubjectRecord> records;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_view(line, ',');
    if (f.size() != ncols)
      throw ParseError(line_no, "expected " + std::to_string(ncols) + " fields, got " +
                                    std::to_string(f.size()));
    SubjectRecord r;
    r.subject_id = std::string(f[0]);
    if (r.subject_id.empty()) throw ParseError(line_no, "empty subject_id");
    if (!seen.insert(r.subject_id).second)
      throw ParseError(line_no, "duplicate subject_id " + r.subject_id);
    if (f[1] == "0")
      r.arm = 0;
    else if (f[1] == "1")
      r.arm = 1;
    else
      throw ParseError(line_no, "arm must be 0 or 1, got '" + std::string(f[1]) + "'");

    auto numeric = [&](std::string_view s, const std::string& name) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      auto v = parse_double(s);
      if (!v) throw ParseError(line_no, "non-numeric value '" + std::string(s) + "' in " + name);
      return v;
    };
    std::size_t c = 2;
    for (std::size_t j = 0; j < p; ++j, ++c) r.x.push_back(numeric(f[c], "x" + std::to_string(j + 1)));
    for (std::size_t k = 0; k < periods; ++k, ++c)
      r.z.push_back(numeric(f[c], "z" + std::to_string(k + 1)));
    for (std::size_t k = 0; k < periods; ++k, ++c) {
      if (f[c].empty())
        r.i_flags.emplace_back(std::nullopt);
      else if (f[c] == "0" || f[c] == "1")
        r.i_flags.emplace_back(f[c] == "1" ? 1 : 0);
      else
        throw ParseError(line_no, "i" + std::to_string(k + 1) + " must be 0, 1 or empty");
    }
    r.y = numeric(f[c], "y");
    records.push_back(std::move(r));
  }
  return TrialDataset(std::move(records), p, periods + 1);
}

inline TrialDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const TrialDataset& ds) {
  out << detail::csv_header(ds.p(), ds.periods()) << '\n';
  auto num = [&](const std::optional<double>& v) {
    if (v) out << format_double(*v);
  };
  for (const auto& r : ds.records()) {
    if (r.subject_id.find_first_of(",\"\r\n") != std::string::npos)
      throw Error("subject_id '" + r.subject_id + "' contains a reserved character");
    out << r.subject_id << ',' << r.arm;
    for (const auto& v : r.x) out << ',', num(v);
    for (const auto& v : r.z) out << ',', num(v);
    for (const auto& v : r.i_flags) {
      out << ',';
      if (v) out << *v;
    }
    out << ',';
    num(r.y);
    out << '\n';
  }
}

inline void save_csv(const TrialDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  write_csv(out, ds);
  if (!out) throw Error("write failed for " + path);
}

}  // namespace adace
