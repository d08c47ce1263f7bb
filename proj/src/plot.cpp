#include "densitree/plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "densitree/error.hpp"
#include "densitree/io.hpp"

namespace densitree {

namespace {

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* colour(int label) {
  if (label <= 0) return "#bbbbbb";
  return kPalette[static_cast<std::size_t>(label - 1) % kPalette.size()];
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#000", double width = 1.0) {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
          << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none") {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
          << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r) << "\" fill=\"" << fill
          << "\" fill-opacity=\"0.8\"/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "middle", int size = 11) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
          << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) body_ << num(x) << "," << num(y) << " ";
    body_ << "\"/>\n";
  }
  std::string str() const {
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
        << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_;
  double h_;
  std::ostringstream body_;
};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string plot_mode_function(const std::filesystem::path& run_dir) {
  const NumericData mf = read_numeric_csv(run_dir / "modefn.csv");
  const Matrix& v = mf.values;
  double top = 1.0;
  for (std::size_t k = 0; k < v.rows(); ++k) top = std::max(top, v(k, 1));
  const double w = 480, h = 320, left = 50, right = 20, upper = 30, lower = 45;
  auto X = [&](double p) { return left + p * (w - left - right); };
  auto Y = [&](double m) { return h - lower - m / (top + 0.5) * (h - upper - lower); };
  Svg svg(w, h);
  svg.line(X(0), Y(0), X(1), Y(0));
  svg.line(X(0), Y(0), X(0), Y(top + 0.5));
  for (int m = 0; m <= static_cast<int>(top); ++m) svg.text(X(0) - 8, Y(m) + 4, std::to_string(m), "end");
  for (int t = 0; t <= 4; ++t) svg.text(X(t / 4.0), Y(0) + 16, num(t / 4.0));
  svg.text(X(0.5), h - 8, "fraction of data points");
  svg.text(14, Y(top / 2), "m(p)");
  std::vector<std::pair<double, double>> pts{{X(0), Y(0)}};
  double prev = 0.0;
  for (std::size_t k = 0; k < v.rows(); ++k) {
    const double p = v(k, 0);
    pts.emplace_back(X(p), Y(prev));
    pts.emplace_back(X(p), Y(v(k, 1)));
    prev = v(k, 1);
  }
  pts.emplace_back(X(1), Y(prev));
  pts.emplace_back(X(1), Y(0));
  svg.polyline(pts, "#1f77b4");
  svg.text(w / 2, 18, "Mode function", "middle", 13);
  return svg.str();
}

std::string plot_tree(const std::filesystem::path& run_dir) {
  nlohmann::json tree;
  try {
    tree = nlohmann::json::parse(read_text(run_dir / "tree.json"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad tree.json: ") + e.what());
  }
  const auto& nodes = tree.at("nodes");
  const int root = tree.at("root").get<int>();
  // Leaves left to right in depth-first order, children sorted by their smallest label.
  std::function<int(int)> min_label = [&](int id) {
    const auto& node = nodes.at(static_cast<std::size_t>(id));
    if (node.at("children").empty()) return node.at("label").get<int>();
    int best = 1 << 30;
    for (int c : node.at("children")) best = std::min(best, min_label(c));
    return best;
  };
  std::map<int, double> xpos;
  int next_leaf = 0;
  int leaves = 0;
  for (const auto& node : nodes) leaves += node.at("children").empty() ? 1 : 0;
  const double w = 120 + 60.0 * leaves, h = 340, left = 50, upper = 30, lower = 40;
  auto Y = [&](double height) { return h - lower - height * (h - upper - lower); };
  Svg svg(w, h);
  std::function<double(int)> place = [&](int id) {
    const auto& node = nodes.at(static_cast<std::size_t>(id));
    const double height = node.at("height").get<double>();
    if (node.at("children").empty()) {
      const double x = left + 40 + 60.0 * next_leaf++;
      svg.line(x, Y(0), x, Y(height), "#444");
      svg.text(x, Y(0) + 16, std::to_string(node.at("label").get<int>()));
      return xpos[id] = x;
    }
    std::vector<int> kids = node.at("children").get<std::vector<int>>();
    std::sort(kids.begin(), kids.end(), [&](int a, int b) { return min_label(a) < min_label(b); });
    double lo = 1e300, hi = -1e300;
    for (int c : kids) {
      const double x = place(c);
      const double ch = nodes.at(static_cast<std::size_t>(c)).at("height").get<double>();
      svg.line(x, Y(ch), x, Y(height), "#444");
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    svg.line(lo, Y(height), hi, Y(height), "#444");
    return xpos[id] = 0.5 * (lo + hi);
  };
  place(root);
  svg.line(left, Y(0), left, Y(1));
  for (int t = 0; t <= 4; ++t) svg.text(left - 6, Y(t / 4.0) + 4, num(t / 4.0), "end");
  svg.text(w / 2, 18, "Cluster tree", "middle", 13);
  return svg.str();
}

std::string plot_scatter_matrix(const std::filesystem::path& run_dir) {
  const NumericData data = read_numeric_csv(run_dir / "data.csv");
  const std::vector<int> labels = read_labels(run_dir / "labels.csv");
  const Matrix& x = data.values;
  const std::size_t d = std::min<std::size_t>(x.cols(), 8);
  const double cell = 130, pad = 10;
  const double size = pad + d * cell;
  Svg svg(size + pad, size + pad);
  std::vector<double> lo(d, 1e300), hi(d, -1e300);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], x(i, j));
      hi[j] = std::max(hi[j], x(i, j));
    }
  }
  auto scale = [&](std::size_t j, double v) { return hi[j] > lo[j] ? (v - lo[j]) / (hi[j] - lo[j]) : 0.5; };
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double x0 = pad + c * cell, y0 = pad + r * cell;
      svg.rect(x0 + 2, y0 + 2, cell - 4, cell - 4, "none", "#999");
      if (r == c) {
        svg.text(x0 + cell / 2, y0 + cell / 2, xml_escape(data.names[r]));
        continue;
      }
      for (std::size_t i = 0; i < x.rows(); ++i) {
        svg.circle(x0 + 6 + scale(c, x(i, c)) * (cell - 12), y0 + cell - 6 - scale(r, x(i, r)) * (cell - 12), 1.8,
                   colour(labels[i]));
      }
    }
  }
  return svg.str();
}

std::string plot_dbs(const std::filesystem::path& run_dir) {
  const NumericData rows = read_numeric_csv(run_dir / "dbs.csv");
  const Matrix& v = rows.values;
  const double bar = 3, gap = 8, left = 40, upper = 30, h = 300, lower = 30;
  int classes = 0;
  for (std::size_t k = 0; k < v.rows(); ++k) classes = std::max(classes, static_cast<int>(v(k, 1)));
  const double w = left + 20 + bar * static_cast<double>(v.rows()) + gap * classes;
  auto Y = [&](double s) { return upper + (1.0 - s) / 2.0 * (h - upper - lower); };
  Svg svg(w, h);
  double x = left + 10;
  int prev = 0;
  for (std::size_t k = 0; k < v.rows(); ++k) {
    const int label = static_cast<int>(v(k, 1));
    if (label != prev && prev != 0) x += gap;
    prev = label;
    const double s = v(k, 2);
    svg.rect(x, std::min(Y(s), Y(0)), bar, std::fabs(Y(s) - Y(0)), colour(label));
    x += bar;
  }
  svg.line(left, Y(0), w - 10, Y(0));
  svg.line(left, Y(1), left, Y(-1));
  for (int t = -1; t <= 1; ++t) svg.text(left - 6, Y(t) + 4, std::to_string(t), "end");
  svg.text(w / 2, 18, "Density-based silhouette", "middle", 13);
  return svg.str();
}

std::string plot(const std::filesystem::path& run_dir, int which) {
  switch (which) {
    case 1: return plot_mode_function(run_dir);
    case 2: return plot_tree(run_dir);
    case 3: return plot_scatter_matrix(run_dir);
    case 4: return plot_dbs(run_dir);
    default: throw InputError("--which must be 1, 2, 3 or 4");
  }
}

}  // namespace densitree
