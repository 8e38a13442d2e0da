#include "ffstab/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ffstab/errors.hpp"

namespace ffstab {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw DomainError("csv: row width differs from header");
  rows.push_back(std::move(row));
}

std::string cell(double v) { return format_double(v); }
std::string cell(long long v) { return std::to_string(v); }

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_row(std::ostringstream& os, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << quote(row[i]);
  os << '\n';
}

}  // namespace

std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  write_row(os, t.header);
  for (const auto& r : t.rows) write_row(os, r);
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path.string());
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

namespace {

json matrix_part(const Matrix& m, bool imag) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(imag ? m(i, j).imag() : m(i, j).real());
    rows.push_back(std::move(r));
  }
  return rows;
}

json weight_json(const Weight& w) {
  switch (w.kind) {
    case Weight::Kind::None:
      return {{"kind", "none"}};
    case Weight::Kind::StretchedExp:
      return {{"kind", "stretched_exp"}, {"K", w.K}, {"s", w.s}};
    case Weight::Kind::Tabulated: {
      json knots = json::array();
      for (auto [r, h] : w.table) knots.push_back({r, h});
      return {{"kind", "tabulated"}, {"knots", knots}};
    }
  }
  return {};
}

Weight weight_from(const json& j) {
  const std::string kind = j.value("kind", "none");
  if (kind == "none") return Weight::none();
  if (kind == "stretched_exp") return Weight::stretched_exp(j.at("K").get<double>(), j.at("s").get<double>());
  if (kind == "tabulated") {
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots")) knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    return Weight::tabulated(std::move(knots));
  }
  throw ConfigError("unknown weight kind '" + kind + "'");
}

}  // namespace

std::string interaction_to_json(const Interaction& phi) {
  json j;
  j["kind"] = phi.kind() == InteractionKind::Spin ? "spin" : "fermion-even";
  j["d"] = phi.d();
  j["domain"] = {phi.domain().a, phi.domain().b};
  if (phi.decay) {
    j["decay"] = {{"L", phi.decay->L}, {"c", phi.decay->c}, {"kappa", phi.decay->kappa},
                  {"weight", weight_json(phi.decay->weight)}};
  }
  json terms = json::array();
  for (const auto& t : phi.terms()) {
    json e;
    e["key"] = t.key.sites();
    if (t.anchor) e["anchor"] = {t.anchor->center, t.anchor->radius};
    e["support"] = t.op.support.sites();
    e["re"] = matrix_part(t.op.matrix, false);
    e["im"] = matrix_part(t.op.matrix, true);
    terms.push_back(std::move(e));
  }
  j["terms"] = std::move(terms);
  return j.dump(1);
}

Interaction interaction_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("interaction file: ") + e.what());
  }
  try {
    const std::string kind = j.at("kind").get<std::string>();
    InteractionKind k;
    if (kind == "spin")
      k = InteractionKind::Spin;
    else if (kind == "fermion-even")
      k = InteractionKind::FermionEven;
    else
      throw ConfigError("interaction file: unknown kind '" + kind + "'");
    const int d = j.at("d").get<int>();
    Interval domain(j.at("domain").at(0).get<int>(), j.at("domain").at(1).get<int>());
    Interaction phi(k, d, domain);
    if (j.contains("decay")) {
      const auto& dj = j["decay"];
      FFunctionSpec f{dj.at("L").get<double>(), dj.at("c").get<double>(), dj.at("kappa").get<double>(),
                      weight_from(dj.value("weight", json::object()))};
      f.validate();
      phi.decay = f;
    }
    for (const auto& e : j.at("terms")) {
      SiteSet key(e.at("key").get<std::vector<int>>());
      SiteSet support(e.value("support", e.at("key")).get<std::vector<int>>());
      const auto& re = e.at("re");
      const auto n = static_cast<Eigen::Index>(re.size());
      Matrix m(n, n);
      for (Eigen::Index r = 0; r < n; ++r) {
        if (static_cast<Eigen::Index>(re[r].size()) != n) throw ConfigError("interaction file: matrix not square");
        for (Eigen::Index c = 0; c < n; ++c) {
          const double im = e.contains("im") ? e["im"].at(r).at(c).get<double>() : 0.0;
          m(r, c) = Complex(re[r][c].get<double>(), im);
        }
      }
      const AlgebraKind ak = k == InteractionKind::Spin ? AlgebraKind::Spin : AlgebraKind::Fermion;
      LocalOperator op(std::move(m), support, domain, ak, d);
      std::optional<BallAnchor> anchor;
      if (e.contains("anchor")) anchor = BallAnchor{e["anchor"].at(0).get<int>(), e["anchor"].at(1).get<int>()};
      phi.add(key, op, anchor);
    }
    return phi;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("interaction file: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("interaction file: ") + e.what());
  }
}

std::string bounds_to_json(const BoundConstants& b) {
  auto entry = [](double v, const char* formula, double tail = 0.0) {
    json e{{"value", v}, {"formula", formula}};
    if (tail > 0.0) e["tail_bound"] = tail;
    return e;
  };
  json j;
  j["inputs"] = {{"gamma0", b.gamma0},
                 {"C", b.C},
                 {"C_source", b.C_source},
                 {"eta_F_norm", b.eta_norm},
                 {"omega", b.omega.describe()},
                 {"F0", {{"L", b.F0.base.L}, {"c", b.F0.base.c}, {"kappa", b.F0.base.kappa}, {"R", b.F0.params.R}}}};
  j["values"] = {
      {"J1", entry(b.J.J1.upper(), "sum_{|n|>=3} 20 C |n| [Omega((|n|-1)/2)^(1/2) + F0((|n|-3)/2)]", b.J.J1.tail)},
      {"J2", entry(b.J.J2.upper(), "sum_{|n|>=3} 20 C [Omega((|n|-1)/2)^(1/2) + F0((|n|-3)/2)]", b.J.J2.tail)},
      {"J3", entry(b.J.J3.upper(), "sum_{z} Omega(|z|/2) + 2 F0(floor(|z|/2))", b.J.J3.tail)},
      {"M_int", entry(b.M_int, "sup over probes of ||Phi^Int||_F")},
      {"M_D", entry(b.M_D, "sup over probes of ||Phi^D_Lambda||")},
      {"delta", entry(b.form.delta, "J2 (||eta||_F + M_int)")},
      {"beta", entry(b.form.beta, "(3/gamma0) J1 (||eta||_F + M_int)")},
      {"alpha", entry(b.form.alpha, "C (||eta||_F + M_int) (J3 + 4) + delta")},
      {"p", entry(b.form.p, "(3/gamma0) J1 (||eta||_F + M_int)")},
      {"q", entry(b.form.q, "[C (J3 + 4) + J2] (||eta||_F + M_int)")},
      {"m", entry(b.threshold.m, "(3 J1 + 2 J2 + C (J3 + 8)) (||eta||_F + M_int)")},
      {"m_double_sum",
       entry(b.threshold.m_display.value,
             "(sum_{|n|>=3} 20 C (3|n|+2) [...] + C (sum_z Omega(|z|/2) + 2 F0(floor(|z|/2)) + 8)) (||eta||_F + M_int)",
             b.threshold.m_display.tail)},
      {"eps_star", entry(b.threshold.eps_star, "min{1, gamma0 / (m + 2 M_D)}")},
      {"m_prime_D", entry(b.m_prime_D, "m + 2 M_D on the transformed interactions")},
      {"eps_star_fermion", entry(b.eps_star_fermion, "eps_star on the transformed interactions")}};
  j["checks"] = {{"m_forms_agree", b.threshold.forms_agree}, {"J_truncation", b.J.truncation}};
  return j.dump(2);
}

}  // namespace ffstab
