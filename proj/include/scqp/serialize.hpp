#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "scqp/dual.hpp"
#include "scqp/infer.hpp"
#include "scqp/problem.hpp"
#include "scqp/relax.hpp"
#include "scqp/verlan.hpp"

namespace scqp {

// Scientific notation at 17 significant digits; the canonical numeric cell
// format for every CSV artifact (byte-deterministic for a given build).
std::string format_sci(double v);

nlohmann::json to_json(const QuadraticForm& q);
QuadraticForm quadform_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SCQP& p);
SCQP scqp_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DualResult& r, bool include_history = false);
nlohmann::json to_json(const EquivalenceReport& r);
nlohmann::json to_json(const InferredStructure& s);
nlohmann::json to_json(const VerlanResult& r);

// step_index,dual_value,phi_norm
void write_history_csv(std::ostream& os, const DualResult& r);

// step_index,step_kind,alpha,rho,x_norm,dual_value,r_drift
void write_trajectory_csv(std::ostream& os, const std::vector<VerlanRecord>& records,
                          const CVec& s_o);

// cell_index,chi_re,chi_im,t_parameter,singular_flag
void write_structure_csv(std::ostream& os, const InferredStructure& s, const MaterialSet& mat);

struct SionScanRow {
  double x1 = 0.0;
  double x2 = 0.0;
  double value = 0.0;
  bool member = false;
  double divergence_rate = 0.0;
};

// x1,x2,value,member,divergence_rate
void write_sion_scan_csv(std::ostream& os, const std::vector<SionScanRow>& rows);

}  // namespace scqp
