#include "scqp/serialize.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace scqp {

namespace {

using nlohmann::json;

json cx_to_json(cxd v) { return json::array({v.real(), v.imag()}); }

cxd cx_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("complex scalar must be a [re, im] pair");
  }
  return cxd(j[0].get<double>(), j[1].get<double>());
}

json cvec_to_json(const CVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cx_to_json(v(i)));
  return a;
}

CVec cvec_from_json(const json& j) {
  CVec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cx_from_json(j[static_cast<size_t>(i)]);
  return v;
}

json cmat_to_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(cx_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat cmat_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  CMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument("ragged complex matrix in JSON");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = cx_from_json(row[static_cast<size_t>(c)]);
  }
  return m;
}

json rvec_to_json(const RVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

RVec rvec_from_json(const json& j) {
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<size_t>(i)].get<double>();
  return v;
}

const char* sense_name(Sense s) { return s == Sense::GE ? "GE" : "EQ"; }

Sense sense_from_name(const std::string& s) {
  if (s == "GE") return Sense::GE;
  if (s == "EQ") return Sense::EQ;
  throw std::invalid_argument("unknown constraint sense: " + s);
}

}  // namespace

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

json to_json(const QuadraticForm& q) {
  return json{{"A", cmat_to_json(q.A)}, {"s", cvec_to_json(q.s)}, {"c", q.c}};
}

QuadraticForm quadform_from_json(const json& j) {
  try {
    return make_form(cmat_from_json(j.at("A")), cvec_from_json(j.at("s")),
                     j.at("c").get<double>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed quadratic form: ") + e.what());
  }
}

json to_json(const SCQP& p) {
  json cons = json::array();
  for (const SensedConstraint& c : p.constraints) {
    json jc = to_json(c.form);
    jc["sense"] = sense_name(c.sense);
    cons.push_back(std::move(jc));
  }
  json wit = json::array();
  for (const CVec& w : p.feasible_witnesses) wit.push_back(cvec_to_json(w));
  json out{{"label", p.label},      {"notes", p.notes},
           {"objective", to_json(p.objective)}, {"constraints", std::move(cons)},
           {"kappa", rvec_to_json(p.kappa)},    {"feasible_witnesses", std::move(wit)}};
  if (p.scattering.has_value()) {
    const ScatteringModel& m = *p.scattering;
    json jw = json::array();
    for (const CMat& q : m.witnesses) jw.push_back(cmat_to_json(q));
    json js = json::array();
    for (Sense s : m.sense_rule) js.push_back(sense_name(s));
    out["scattering"] = json{{"n", m.n},
                             {"G0", cmat_to_json(m.G0)},
                             {"e_i", cvec_to_json(m.e_i)},
                             {"Xbul_inv", cmat_to_json(m.Xbul_inv)},
                             {"witnesses", std::move(jw)},
                             {"sense_rule", std::move(js)}};
  }
  return out;
}

SCQP scqp_from_json(const json& j) try {
  SCQP p;
  p.label = j.value("label", std::string{});
  p.notes = j.value("notes", std::string{});
  p.objective = quadform_from_json(j.at("objective"));
  for (const json& jc : j.at("constraints")) {
    p.constraints.push_back({quadform_from_json(jc), sense_from_name(jc.at("sense"))});
  }
  p.kappa = rvec_from_json(j.at("kappa"));
  if (j.contains("feasible_witnesses")) {
    for (const json& jw : j["feasible_witnesses"]) {
      p.feasible_witnesses.push_back(cvec_from_json(jw));
    }
  }
  if (j.contains("scattering")) {
    const json& js = j["scattering"];
    ScatteringModel m;
    m.n = js.at("n").get<Eigen::Index>();
    m.G0 = cmat_from_json(js.at("G0"));
    m.e_i = cvec_from_json(js.at("e_i"));
    m.Xbul_inv = cmat_from_json(js.at("Xbul_inv"));
    for (const json& jw : js.at("witnesses")) m.witnesses.push_back(cmat_from_json(jw));
    for (const json& jn : js.at("sense_rule")) {
      m.sense_rule.push_back(sense_from_name(jn.get<std::string>()));
    }
    p.scattering = std::move(m);
  }
  validate(p);
  return p;
} catch (const json::exception& e) {
  throw std::invalid_argument(std::string("malformed program JSON: ") + e.what());
}

json to_json(const DualResult& r, bool include_history) {
  json out{{"value", r.eval.value},
           {"phi_star", rvec_to_json(r.phi_star)},
           {"x_star", cvec_to_json(r.eval.x_star)},
           {"grad", rvec_to_json(r.eval.grad)},
           {"min_eig", r.eval.min_eig_Apsi},
           {"in_range", r.eval.in_range},
           {"iterations", r.iterations},
           {"converged", r.converged}};
  if (include_history && !r.history.empty()) {
    json h = json::array();
    for (const auto& [phi, value] : r.history) {
      h.push_back(json{{"phi", rvec_to_json(phi)}, {"value", value}});
    }
    out["history"] = std::move(h);
  }
  return out;
}

json to_json(const EquivalenceReport& r) {
  json out{{"dual_value", r.dual_value}, {"sdp_value", r.sdp_value},
           {"schur_value", r.schur_value}, {"gap", r.gap},
           {"pass", r.pass},             {"rank", r.rank}};
  out["extracted_x"] = r.extracted_x.has_value() ? cvec_to_json(*r.extracted_x) : json{};
  return out;
}

json to_json(const InferredStructure& s) {
  json cells = json::array();
  for (Eigen::Index i : s.singular_cells) cells.push_back(i);
  return json{{"chi_raw", cvec_to_json(s.chi_raw)},
              {"chi_proj", cvec_to_json(s.chi_proj)},
              {"residuals", rvec_to_json(s.residuals)},
              {"objective_resim", s.objective_resim},
              {"singular_cells", std::move(cells)}};
}

json to_json(const VerlanResult& r) {
  int scrapes = 0;
  for (const VerlanRecord& rec : r.state.history) {
    scrapes += (rec.step_kind == StepKind::SCRAPE);
  }
  json out{{"terminal", r.terminal},
           {"solves_used", r.solves_used},
           {"r_drift", r.r_drift},
           {"alpha", r.state.alpha},
           {"dual_value", r.state.dual_cur},
           {"rho", r.state.rho_cur},
           {"x_norm", r.state.x_cur.size() ? r.state.x_cur.norm() : 0.0},
           {"records", r.state.history.size()},
           {"scrapes", scrapes},
           {"lemma_ok", r.lemma_ok},
           {"diagnostics", r.diagnostics}};
  out["inferred"] = r.inferred.has_value() ? to_json(*r.inferred) : json{};
  return out;
}

void write_history_csv(std::ostream& os, const DualResult& r) {
  os << "step_index,dual_value,phi_norm\n";
  for (size_t i = 0; i < r.history.size(); ++i) {
    os << i << ',' << format_sci(r.history[i].second) << ','
       << format_sci(r.history[i].first.norm()) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const std::vector<VerlanRecord>& records,
                          const CVec& s_o) {
  os << "step_index,step_kind,alpha,rho,x_norm,dual_value,r_drift\n";
  for (size_t i = 0; i < records.size(); ++i) {
    const VerlanRecord& rec = records[i];
    os << i << ',' << to_string(rec.step_kind) << ',' << format_sci(rec.alpha) << ','
       << format_sci(rec.rho) << ',' << format_sci(rec.x_norm) << ','
       << format_sci(rec.dual_value) << ',' << format_sci((rec.r - s_o).norm()) << '\n';
  }
}

void write_structure_csv(std::ostream& os, const InferredStructure& s, const MaterialSet& mat) {
  os << "cell_index,chi_re,chi_im,t_parameter,singular_flag\n";
  const double denom = std::norm(mat.chi_max);
  for (Eigen::Index i = 0; i < s.chi_proj.size(); ++i) {
    const double t = denom > 0.0
                         ? std::real(s.chi_proj(i) * std::conj(mat.chi_max)) / denom
                         : 0.0;
    const bool singular =
        std::find(s.singular_cells.begin(), s.singular_cells.end(), i) != s.singular_cells.end();
    os << i << ',' << format_sci(s.chi_proj(i).real()) << ','
       << format_sci(s.chi_proj(i).imag()) << ',' << format_sci(t) << ','
       << (singular ? 1 : 0) << '\n';
  }
}

void write_sion_scan_csv(std::ostream& os, const std::vector<SionScanRow>& rows) {
  os << "x1,x2,value,member,divergence_rate\n";
  for (const SionScanRow& r : rows) {
    os << format_sci(r.x1) << ',' << format_sci(r.x2) << ',' << format_sci(r.value) << ','
       << (r.member ? 1 : 0) << ',' << format_sci(r.divergence_rate) << '\n';
  }
}

}  // namespace scqp
