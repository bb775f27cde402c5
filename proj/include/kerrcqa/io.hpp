#pragma once

// JSON and CSV conversions. Complex numbers are [re, im] in JSON and split columns in CSV.

#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cqa.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace kerrcqa::io {

using json = nlohmann::json;

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw Error(ErrorKind::InvalidConfig, what + " must be a [re, im] array");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline double number_from_json(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(ErrorKind::InvalidConfig, what + " must be a number");
  return j.get<double>();
}

inline int int_from_json(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(ErrorKind::InvalidConfig, what + " must be an integer");
  return j.get<int>();
}

inline bool bool_from_json(const json& j, const std::string& what) {
  if (!j.is_boolean()) throw Error(ErrorKind::InvalidConfig, what + " must be true or false");
  return j.get<bool>();
}

inline void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidConfig, where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorKind::InvalidConfig, "unknown key '" + it.key() + "' in " + where);
}

inline PhysicalParams params_from_json(const json& j) {
  reject_unknown(j, {"K", "Delta", "Lambda1", "Lambda2", "Lambda3", "kappa1", "kappa2", "allow_negative_loss"}, "params");
  PhysicalParams p;
  if (j.contains("K")) p.K = number_from_json(j["K"], "K");
  if (j.contains("Delta")) p.Delta = number_from_json(j["Delta"], "Delta");
  if (j.contains("Lambda1")) p.Lambda1 = complex_from_json(j["Lambda1"], "Lambda1");
  if (j.contains("Lambda2")) p.Lambda2 = complex_from_json(j["Lambda2"], "Lambda2");
  if (j.contains("Lambda3")) p.Lambda3 = complex_from_json(j["Lambda3"], "Lambda3");
  if (j.contains("kappa1")) p.kappa1 = number_from_json(j["kappa1"], "kappa1");
  if (j.contains("kappa2")) p.kappa2 = number_from_json(j["kappa2"], "kappa2");
  if (j.contains("allow_negative_loss")) p.allow_negative_loss = bool_from_json(j["allow_negative_loss"], "allow_negative_loss");
  return p;
}

inline json to_json(const PhysicalParams& p) {
  return json{{"K", p.K},
              {"Delta", p.Delta},
              {"Lambda1", to_json(p.Lambda1)},
              {"Lambda2", to_json(p.Lambda2)},
              {"Lambda3", to_json(p.Lambda3)},
              {"kappa1", p.kappa1},
              {"kappa2", p.kappa2},
              {"allow_negative_loss", p.allow_negative_loss}};
}

inline json finite_or_null(cplx z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return nullptr;
  return to_json(z);
}

inline json to_json(const DerivedParams& d) {
  return json{{"tildeK", to_json(d.tildeK)},       {"tildeDelta", to_json(d.tildeDelta)},
              {"D", to_json(d.D)},                 {"lambda1", to_json(d.lambda1)},
              {"lambda2", to_json(d.lambda2)},     {"lambda3", to_json(d.lambda3)},
              {"eps_plus", to_json(d.eps_plus)},   {"eps_minus", to_json(d.eps_minus)},
              {"alpha_plus", to_json(d.alpha_plus)}, {"r1", finite_or_null(d.r1)},
              {"r2", finite_or_null(d.r2)},        {"r1_defined", d.r1_defined}};
}

inline json to_json(const PhaseClass& c) {
  json j{{"name", to_string(c)}};
  if (c.n1 >= 0) j["n1"] = c.n1;
  if (c.n2 >= 0) j["n2"] = c.n2;
  j["residual_r1"] = std::isfinite(c.res_r1) ? json(c.res_r1) : json(nullptr);
  j["residual_r2"] = std::isfinite(c.res_r2) ? json(c.res_r2) : json(nullptr);
  return j;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with a config comment line, a header, and rows flushed as written.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const json& config, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw Error(ErrorKind::InvalidConfig, "cannot write " + path);
    os_ << "# config: " << config.dump() << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
    os_.flush();
  }

  CsvWriter& add(double v) { return push(fmt(v)); }
  CsvWriter& add(int v) { return push(std::to_string(v)); }
  CsvWriter& add(std::size_t v) { return push(std::to_string(v)); }
  CsvWriter& add(cplx z) {
    push(fmt(z.real()));
    return push(fmt(z.imag()));
  }
  CsvWriter& add(const std::string& s) {
    std::string q = s;
    bool quote = q.find_first_of(",\"\n") != std::string::npos;
    if (quote) {
      std::string e = "\"";
      for (char ch : q) e += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      q = e + "\"";
    }
    return push(q);
  }
  void end_row() {
    for (std::size_t i = 0; i < cells_.size(); ++i) os_ << (i ? "," : "") << cells_[i];
    os_ << '\n';
    os_.flush();
    cells_.clear();
  }

 private:
  CsvWriter& push(std::string s) {
    cells_.push_back(std::move(s));
    return *this;
  }
  std::ofstream os_;
  std::vector<std::string> cells_;
};

inline void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::InvalidConfig, "cannot write " + path);
  os << j.dump(2) << '\n';
}

}  // namespace kerrcqa::io
