#include "bezreach/io.h"

#include <charconv>
#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "bezreach/errors.h"

namespace bezreach::io {
namespace {

std::string format_with(double value, int precision) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, precision);
  return std::string(buf, res.ptr);
}

std::string svg_number(double value) { return format_with(value, 6); }

}  // namespace

std::string format_double(double value) { return format_with(value, 17); }

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += csv_field(header[i]);
  }
  body_ += "\r\n";
}

void CsvTable::add_row(const Eigen::VectorXd& values) {
  if (static_cast<size_t>(values.size()) != columns_) {
    throw StructuralError("CSV row has " + std::to_string(values.size()) +
                          " fields, header has " + std::to_string(columns_));
  }
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_double(values(i));
  }
  body_ += "\r\n";
  ++rows_;
}

std::string CsvTable::str() const { return body_; }

namespace {

std::vector<std::string> numbered(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

CsvTable matrix_table(const Eigen::MatrixXd& M) {
  CsvTable table(numbered("c", static_cast<int>(M.cols())));
  for (Eigen::Index r = 0; r < M.rows(); ++r) table.add_row(M.row(r).transpose());
  return table;
}

CsvTable halfspace_table(const Polytope& P) {
  auto header = numbered("a", P.dim());
  header.push_back("b");
  CsvTable table(header);
  Eigen::VectorXd row(P.dim() + 1);
  for (int r = 0; r < P.rows(); ++r) {
    row << P.A().row(r).transpose(), P.b()(r);
    table.add_row(row);
  }
  return table;
}

CsvTable point_table(const std::vector<Eigen::VectorXd>& points, int dim) {
  CsvTable table(numbered("x", dim));
  for (const auto& p : points) table.add_row(p);
  return table;
}

CsvTable trajectory_table(const PlanningModel& model,
                          const PlannedTrajectory& trajectory, double rate) {
  const int n = model.n();
  const int m = model.m();
  std::vector<std::string> header{"t"};
  for (const auto& h : numbered("x_d", n)) header.push_back(h);
  for (const auto& h : numbered("u_d", m)) header.push_back(h);
  CsvTable table(header);
  if (trajectory.empty()) return table;
  if (!(rate > 0)) throw DomainError("trajectory sample rate must be positive");
  const int samples =
      std::max(1, static_cast<int>(std::ceil(trajectory.duration() * rate - 1e-9)));
  Eigen::VectorXd row(1 + n + m);
  for (int s = 0; s <= samples; ++s) {
    const double t = trajectory.duration() * s / samples;
    const Eigen::MatrixXd d = trajectory.derivatives(t);
    const Eigen::VectorXd x = d.leftCols(model.gamma()).reshaped();
    row << t, x, flat_input(model, x, d.col(model.gamma()));
    table.add_row(row);
  }
  return table;
}

CsvTable rollout_table(const RolloutResult& result) {
  const int n = static_cast<int>(result.states.rows());
  const int m = static_cast<int>(result.inputs.rows());
  std::vector<std::string> header{"t"};
  for (const auto& h : numbered("x", n)) header.push_back(h);
  for (const auto& h : numbered("u", m)) header.push_back(h);
  header.push_back("state_margin");
  header.push_back("input_margin");
  CsvTable table(header);
  Eigen::VectorXd row(3 + n + m);
  for (int s = 0; s < result.steps(); ++s) {
    row << result.time(s), result.states.col(s), result.inputs.col(s),
        result.margins.state_margin(s), result.margins.input_margin(s);
    table.add_row(row);
  }
  return table;
}

Json to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Json to_json(const Eigen::MatrixXd& M) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    out.push_back(to_json(Eigen::VectorXd(M.row(r).transpose())));
  }
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw StructuralError("expected a numeric array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw StructuralError("expected a numeric array");
    v(i) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw StructuralError("expected an array of rows");
  const Eigen::Index cols = vector_from_json(j[0]).size();
  Eigen::MatrixXd M(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(j[r]);
    if (row.size() != cols) throw StructuralError("matrix rows differ in length");
    M.row(r) = row.transpose();
  }
  return M;
}

Json curve_to_json(const BezierCurve& curve) {
  Json points = Json::array();
  for (Eigen::Index r = 0; r < curve.points().rows(); ++r) {
    for (Eigen::Index c = 0; c < curve.points().cols(); ++c) {
      points.push_back(curve.points()(r, c));
    }
  }
  return Json{{"order", curve.order()},
              {"duration", curve.duration()},
              {"dim", curve.dim()},
              {"points", points}};
}

BezierCurve curve_from_json(const Json& j) {
  const int order = j.at("order").get<int>();
  const int dim = j.value("dim", 1);
  const Eigen::VectorXd flat = vector_from_json(j.at("points"));
  if (order < 0 || dim < 1 || flat.size() != static_cast<Eigen::Index>(dim) * (order + 1)) {
    throw StructuralError("curve points do not match order and dimension");
  }
  Eigen::MatrixXd points(dim, order + 1);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c <= order; ++c) points(r, c) = flat(r * (order + 1) + c);
  }
  return BezierCurve(points, j.at("duration").get<double>());
}

Json trajectory_to_json(const PlannedTrajectory& trajectory) {
  Json segments = Json::array();
  for (const auto& seg : trajectory.segments()) segments.push_back(curve_to_json(seg));
  return Json{{"gamma", trajectory.gamma()},
              {"duration", trajectory.duration()},
              {"segments", segments}};
}

PlannedTrajectory trajectory_from_json(const Json& j) {
  std::vector<BezierCurve> segments;
  for (const auto& s : j.at("segments")) segments.push_back(curve_from_json(s));
  return PlannedTrajectory(j.at("gamma").get<int>(), std::move(segments), {});
}

Json certificate_to_json(const CertificatePolytope& cert) {
  Json refs = Json::array();
  for (const auto& r : cert.references) refs.push_back(to_json(r));
  return Json{{"order", cert.order},      {"gamma", cert.gamma},
              {"m", cert.m},              {"duration", cert.duration},
              {"segments", cert.segments}, {"references", refs},
              {"rows", cert.F.rows()},    {"F", to_json(cert.F)},
              {"G", to_json(cert.G)}};
}

Json graph_to_json(const ReachGraph& graph) {
  Json vertices = Json::array();
  for (const auto& v : graph.vertices) vertices.push_back(to_json(v));
  Json edges = Json::array();
  for (int i = 0; i < graph.size(); ++i) {
    for (const auto& e : graph.adjacency[i]) {
      edges.push_back(Json{{"from", i}, {"to", e.to}, {"cost", e.cost},
                           {"witness", to_json(e.witness)}});
    }
  }
  return Json{{"seed", graph.seed},
              {"mode", graph.mode == EdgeMode::kDirect ? "direct" : "intersection"},
              {"vertex_count", graph.size()},
              {"edge_count", graph.edge_count()},
              {"candidate_pairs", graph.candidate_pairs},
              {"uncertified_vertices", graph.uncertified},
              {"vertices", vertices},
              {"edges", edges}};
}

Json margins_to_json(const MarginReport& report) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(); };
  return Json{{"min_state_margin", finite_or_null(report.min_state_margin)},
              {"min_input_margin", finite_or_null(report.min_input_margin)},
              {"steps", report.state_margin.size()},
              {"pass", report.pass}};
}

SvgPlot::SvgPlot(double width, double height, Box view)
    : width_(width), height_(height), view_(std::move(view)) {
  if (view_.lower.size() != 2 || view_.upper.size() != 2 ||
      !((view_.upper - view_.lower).array() > 0).all()) {
    throw DomainError("SVG view must be a nondegenerate 2-D box");
  }
}

namespace {
constexpr double kPad = 50.0;
}  // namespace

double SvgPlot::px(double x) const {
  return kPad + (x - view_.lower(0)) / (view_.upper(0) - view_.lower(0)) *
                    (width_ - 2 * kPad);
}

double SvgPlot::py(double y) const {
  return height_ - kPad -
         (y - view_.lower(1)) / (view_.upper(1) - view_.lower(1)) * (height_ - 2 * kPad);
}

void SvgPlot::scatter(const std::vector<Eigen::VectorXd>& points,
                      const std::string& color, double radius, double opacity) {
  body_ += "<g fill=\"" + xml_escape(color) + "\" fill-opacity=\"" +
           svg_number(opacity) + "\">\n";
  for (const auto& p : points) {
    body_ += "<circle cx=\"" + svg_number(px(p(0))) + "\" cy=\"" +
             svg_number(py(p(1))) + "\" r=\"" + svg_number(radius) + "\"/>\n";
  }
  body_ += "</g>\n";
}

void SvgPlot::polyline(const std::vector<Eigen::VectorXd>& points,
                       const std::string& color, double stroke) {
  if (points.empty()) return;
  body_ += "<polyline fill=\"none\" stroke=\"" + xml_escape(color) +
           "\" stroke-width=\"" + svg_number(stroke) + "\" points=\"";
  for (size_t i = 0; i < points.size(); ++i) {
    if (i) body_ += ' ';
    body_ += svg_number(px(points[i](0))) + "," + svg_number(py(points[i](1)));
  }
  body_ += "\"/>\n";
}

void SvgPlot::marker(const Eigen::VectorXd& point, const std::string& color,
                     const std::string& label) {
  const std::string x = svg_number(px(point(0)));
  const std::string y = svg_number(py(point(1)));
  body_ += "<circle cx=\"" + x + "\" cy=\"" + y + "\" r=\"5\" fill=\"" +
           xml_escape(color) + "\"/>\n";
  body_ += "<text x=\"" + x + "\" y=\"" + y + "\" dx=\"7\" dy=\"-7\" font-size=\"12\">" +
           xml_escape(label) + "</text>\n";
}

void SvgPlot::title(const std::string& text) {
  body_ += "<text x=\"" + svg_number(width_ / 2) +
           "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">" + xml_escape(text) +
           "</text>\n";
}

void SvgPlot::axis_labels(const std::string& x, const std::string& y) {
  body_ += "<text x=\"" + svg_number(width_ / 2) + "\" y=\"" +
           svg_number(height_ - 12) + "\" text-anchor=\"middle\" font-size=\"13\">" +
           xml_escape(x) + "</text>\n";
  body_ += "<text x=\"15\" y=\"" + svg_number(height_ / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 15 " +
           svg_number(height_ / 2) + ")\">" + xml_escape(y) + "</text>\n";
}

std::string SvgPlot::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg_number(width_) +
         "\" height=\"" + svg_number(height_) + "\" viewBox=\"0 0 " +
         svg_number(width_) + " " + svg_number(height_) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double x0 = px(view_.lower(0)), x1 = px(view_.upper(0));
  const double y0 = py(view_.lower(1)), y1 = py(view_.upper(1));
  out += "<rect x=\"" + svg_number(x0) + "\" y=\"" + svg_number(y1) + "\" width=\"" +
         svg_number(x1 - x0) + "\" height=\"" + svg_number(y0 - y1) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  // Tick labels at the view corners.
  out += "<g font-size=\"11\">\n";
  out += "<text x=\"" + svg_number(x0) + "\" y=\"" + svg_number(y0 + 15) +
         "\" text-anchor=\"middle\">" + svg_number(view_.lower(0)) + "</text>\n";
  out += "<text x=\"" + svg_number(x1) + "\" y=\"" + svg_number(y0 + 15) +
         "\" text-anchor=\"middle\">" + svg_number(view_.upper(0)) + "</text>\n";
  out += "<text x=\"" + svg_number(x0 - 5) + "\" y=\"" + svg_number(y0) +
         "\" text-anchor=\"end\">" + svg_number(view_.lower(1)) + "</text>\n";
  out += "<text x=\"" + svg_number(x0 - 5) + "\" y=\"" + svg_number(y1 + 4) +
         "\" text-anchor=\"end\">" + svg_number(view_.upper(1)) + "</text>\n";
  out += "</g>\n";
  return out + body_ + "</svg>\n";
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string sha256_hex(const std::string& content) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(content.data(), content.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw NumericalError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw Error("cannot write " + path.string());
  return sha256_hex(content);
}

}  // namespace bezreach::io
