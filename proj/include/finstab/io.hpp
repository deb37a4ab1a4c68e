// JSON and CSV serialization. Numbers are written in the shortest form that
// round-trips to the same double, so identical runs give identical bytes.

#pragma once

#include "finstab/frontends.hpp"
#include "finstab/integrator.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace finstab {

using json = nlohmann::json;

/// Shortest round-trip decimal ("nan", "inf", "-inf" for non-finite values).
std::string format_number(double x);

json to_json(const Vec& v);
json to_json(const Mat& m);  // array of rows
/// Accepts an array of numbers.
Vec vec_from_json(const json& j, const std::string& key);
/// Accepts an array of equal-length rows.
Mat mat_from_json(const json& j, const std::string& key);

/// {dim, metric, generator, control_op | input_map, basis_labels}. The
/// reader also accepts metric = "identity" and generator = {"diagonal": [..]}.
json model_to_json(const ModalModel& model);
ModalModel model_from_json(const json& j);

json decomposition_to_json(const DecompositionResult& dec);
json controller_to_json(const ControllerSpec& spec);
json phi_to_json(const PhiSpec& phi);
json bound_to_json(const SettlingBound& b);
json check_to_json(const CheckReport& c);
json diagnostics_to_json(const Diagnostics& d);
json h2_to_json(const H2Report& r);

/// Header "t,<state labels>,<control labels>,V"; LF line endings.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const std::vector<std::string>& state_labels,
                          const std::vector<std::string>& control_labels);
/// Plain comma-separated matrix, one row per line.
void write_matrix_csv(std::ostream& os, const Mat& m);

}  // namespace finstab
