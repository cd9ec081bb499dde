#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "bezreach/constraints.h"
#include "bezreach/lp.h"
#include "bezreach/planner.h"
#include "bezreach/sim.h"

namespace bezreach::io {

using Json = nlohmann::json;

// 17 significant digits, '.' decimal separator regardless of locale.
std::string format_double(double value);

// RFC 4180: CRLF records, fields quoted when they contain ',', '"', CR or LF.
std::string csv_field(const std::string& field);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const Eigen::VectorXd& values);
  std::string str() const;
  int rows() const { return rows_; }

 private:
  size_t columns_;
  int rows_ = 0;
  std::string body_;
};

// One row per matrix row, header c0..c(k-1).
CsvTable matrix_table(const Eigen::MatrixXd& M);
// A | b as columns a0..a(n-1), b.
CsvTable halfspace_table(const Polytope& P);
// One point per row, header x0..x(n-1).
CsvTable point_table(const std::vector<Eigen::VectorXd>& points, int dim);
// t, x_d components, u_d at `rate` samples per unit time.
CsvTable trajectory_table(const PlanningModel& model,
                          const PlannedTrajectory& trajectory, double rate);
// t, x, u, state_margin, input_margin per step.
CsvTable rollout_table(const RolloutResult& result);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& M);  // array of rows
Eigen::VectorXd vector_from_json(const Json& j);
Eigen::MatrixXd matrix_from_json(const Json& j);

// {order, duration, points: row-major}
Json curve_to_json(const BezierCurve& curve);
BezierCurve curve_from_json(const Json& j);
Json trajectory_to_json(const PlannedTrajectory& trajectory);
PlannedTrajectory trajectory_from_json(const Json& j);
Json certificate_to_json(const CertificatePolytope& cert);
Json graph_to_json(const ReachGraph& graph);
Json margins_to_json(const MarginReport& report);

// Minimal SVG plot with data-space axes; y grows upward.
class SvgPlot {
 public:
  SvgPlot(double width, double height, Box view);

  void scatter(const std::vector<Eigen::VectorXd>& points, const std::string& color,
               double radius = 1.5, double opacity = 0.6);
  void polyline(const std::vector<Eigen::VectorXd>& points, const std::string& color,
                double stroke = 1.5);
  void marker(const Eigen::VectorXd& point, const std::string& color,
              const std::string& label);
  void title(const std::string& text);
  void axis_labels(const std::string& x, const std::string& y);
  std::string str() const;

 private:
  double px(double x) const;
  double py(double y) const;

  double width_;
  double height_;
  Box view_;
  std::string body_;
};

std::string xml_escape(const std::string& text);

// Writes `content` and returns its lowercase hex SHA-256.
std::string write_file(const std::filesystem::path& path, const std::string& content);
std::string sha256_hex(const std::string& content);

}  // namespace bezreach::io
