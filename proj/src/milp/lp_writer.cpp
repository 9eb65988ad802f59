#include "vppflex/milp/lp_writer.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace vppflex::milp {

namespace {

std::string lp_name(const std::string& raw, char prefix, std::size_t index) {
  if (raw.empty()) return std::string(1, prefix) + std::to_string(index);
  std::string out;
  out.reserve(raw.size() + 1);
  for (char c : raw) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ? c : '_');
  if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

std::string num(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_terms(std::ostream& out, const std::vector<std::string>& names, const std::vector<Term>& terms) {
  if (terms.empty()) {
    out << " 0 " << names.front();
    return;
  }
  for (const auto& t : terms) out << (t.coef < 0 ? " - " : " + ") << num(std::abs(t.coef)) << ' ' << names[t.var];
}

}  // namespace

void write_lp(std::ostream& out, const MilpProblem& problem) {
  std::vector<std::string> names(problem.variable_count());
  for (std::size_t j = 0; j < names.size(); ++j) names[j] = lp_name(problem.variable(j).name, 'x', j);

  out << (problem.objective_sense() == ObjectiveSense::maximize ? "Maximize\n" : "Minimize\n") << " obj:";
  std::vector<Term> obj;
  for (std::size_t j = 0; j < names.size(); ++j)
    if (problem.objective()[j] != 0.0) obj.push_back({j, problem.objective()[j]});
  if (!names.empty()) write_terms(out, names, obj);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < problem.constraint_count(); ++i) {
    const auto& c = problem.constraint(i);
    out << ' ' << lp_name(c.name, 'c', i) << ':';
    if (!names.empty()) write_terms(out, names, c.terms);
    out << (c.sense == Sense::le ? " <= " : c.sense == Sense::ge ? " >= " : " = ") << num(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& v = problem.variable(j);
    if (v.lb == -kInf && v.ub == kInf)
      out << ' ' << names[j] << " free\n";
    else
      out << ' ' << num(v.lb) << " <= " << names[j] << " <= " << num(v.ub) << '\n';
  }
  bool any = false;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (!problem.variable(j).integer) continue;
    if (!any) out << "General\n";
    any = true;
    out << ' ' << names[j] << '\n';
  }
  out << "End\n";
}

}  // namespace vppflex::milp
