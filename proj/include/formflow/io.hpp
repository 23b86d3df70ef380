#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <variant>

#include <json.hpp>

#include "formflow/engines.hpp"
#include "formflow/form.hpp"
#include "formflow/verification.hpp"

namespace formflow {

using Json = nlohmann::json;

/// A triple whose scalar field is only known at runtime (file input).
using AnyTriple = std::variant<RealTriple, ComplexTriple>;

namespace detail {

inline Json matrix_to_json(const RealMatrix& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json matrix_to_json(const ComplexMatrix& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < a.cols(); ++j)
      row.push_back(Json::array({a(i, j).real(), a(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Scalar>
Matrix<Scalar> matrix_from_json(const Json& rows, Index n, Index m, const char* what) {
  const auto bad = [what](const char* why) {
    return InvalidInput(std::string("triple_from_json: ") + why + " in " + what);
  };
  if (!rows.is_array() || Index(rows.size()) != n) throw bad("wrong row count");
  Matrix<Scalar> a(n, m);
  for (Index i = 0; i < n; ++i) {
    const Json& row = rows[size_t(i)];
    if (!row.is_array() || Index(row.size()) != m) throw bad("wrong column count");
    for (Index j = 0; j < m; ++j) {
      const Json& e = row[size_t(j)];
      if constexpr (is_complex_v<Scalar>) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
          throw bad("complex entries must be [re, im] pairs");
        a(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        if (!e.is_number()) throw bad("real entries must be numbers");
        a(i, j) = e.get<double>();
      }
    }
  }
  return a;
}

}  // namespace detail

template <typename Scalar>
Json triple_to_json(const FormTriple<Scalar>& t) {
  check_dimensions(t);
  Json out;
  out["field"] = is_complex_v<Scalar> ? "complex" : "real";
  out["n"] = t.dim_v();
  out["m"] = t.dim_h();
  out["omega"] = t.omega;
  out["F"] = detail::matrix_to_json(t.form);
  out["J"] = detail::matrix_to_json(t.map);
  out["M_H"] = detail::matrix_to_json(t.H.gram);
  out["G_V"] = detail::matrix_to_json(t.V.gram);
  return out;
}

inline Json triple_to_json(const AnyTriple& t) {
  return std::visit([](const auto& x) { return triple_to_json(x); }, t);
}

inline AnyTriple triple_from_json(const Json& in) {
  if (!in.is_object()) throw InvalidInput("triple_from_json: expected an object");
  for (const char* key : {"field", "n", "m", "omega", "F", "J", "M_H", "G_V"})
    if (!in.contains(key))
      throw InvalidInput(std::string("triple_from_json: missing key \"") + key + "\"");
  if (!in["field"].is_string() || !in["n"].is_number_integer() || !in["m"].is_number_integer() ||
      !in["omega"].is_number())
    throw InvalidInput("triple_from_json: field/n/m/omega have the wrong types");
  const std::string field = in["field"].get<std::string>();
  const Index n = in["n"].get<Index>();
  const Index m = in["m"].get<Index>();
  if (n < 1 || m < 1) throw InvalidInput("triple_from_json: n and m must be positive");
  const double omega = in["omega"].get<double>();

  const auto build = [&](auto tag) -> AnyTriple {
    using Scalar = decltype(tag);
    FormTriple<Scalar> t{VSpace<Scalar>{detail::matrix_from_json<Scalar>(in["G_V"], n, n, "G_V")},
                         HSpace<Scalar>{detail::matrix_from_json<Scalar>(in["M_H"], m, m, "M_H")},
                         detail::matrix_from_json<Scalar>(in["F"], n, n, "F"),
                         detail::matrix_from_json<Scalar>(in["J"], m, n, "J"), omega};
    check_dimensions(t);
    return t;
  };
  if (field == "real") return build(Real{});
  if (field == "complex") return build(Complex{});
  throw InvalidInput("triple_from_json: field must be \"real\" or \"complex\"");
}

inline Json check_to_json(const CheckResult& c) {
  Json out;
  out["name"] = c.name;
  out["passed"] = c.passed;
  out["applicable"] = c.applicable;
  out["measured"] = c.measured;
  out["threshold"] = c.threshold;
  if (!c.detail.empty()) out["detail"] = c.detail;
  return out;
}

inline Json validation_to_json(const ValidationReport& v) {
  Json out;
  out["ok"] = v.ok;
  out["reason"] = v.reason;
  out["map_rank"] = v.map_rank;
  out["dense_image"] = v.dense_image;
  out["gram_v_ok"] = v.gram_v_ok;
  out["gram_h_ok"] = v.gram_h_ok;
  out["elliptic"] = v.elliptic;
  out["ellipticity_margin"] = v.ellipticity_margin;
  if (v.suggested_omega) out["suggested_omega"] = *v.suggested_omega;
  return out;
}

inline Json report_to_json(const VerificationReport& r) {
  Json out;
  out["validation"] = validation_to_json(r.validation);
  out["constants"] = Json::object();
  for (const auto& [k, v] : r.constants) out["constants"][k] = v;
  out["checks"] = Json::array();
  for (const auto& c : r.checks) out["checks"].push_back(check_to_json(c));
  out["all_passed"] = r.all_passed();
  return out;
}

namespace detail {

inline std::string full_precision(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

/// Columns: t, then one column per real component or a (re, im) pair per
/// complex component.  Full precision so runs can be compared byte for byte.
template <typename Scalar>
void write_evolution_csv(std::ostream& os, const EvolutionResult<Scalar>& r) {
  if (r.states.empty()) throw InvalidInput("write_evolution_csv: empty result");
  const Index m = r.states.front().size();
  os << "t";
  for (Index j = 0; j < m; ++j) {
    if constexpr (is_complex_v<Scalar>)
      os << ",re_" << j << ",im_" << j;
    else
      os << ",component_" << j;
  }
  os << "\n";
  for (size_t i = 0; i < r.times.size(); ++i) {
    os << detail::full_precision(r.times[i]);
    for (Index j = 0; j < m; ++j) {
      if constexpr (is_complex_v<Scalar>)
        os << "," << detail::full_precision(r.states[i](j).real()) << ","
           << detail::full_precision(r.states[i](j).imag());
      else
        os << "," << detail::full_precision(r.states[i](j));
    }
    os << "\n";
  }
}

}  // namespace formflow
