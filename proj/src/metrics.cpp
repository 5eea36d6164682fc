#include "stlncs/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace stlncs {

namespace {

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

}  // namespace

void write_metrics_csv(const std::vector<EvalReport>& reports, const std::string& path) {
  auto os = open_out(path);
  os << "step,mean_return,success_rate,alpha,critic_loss,actor_loss\n";
  for (const auto& r : reports) {
    os << r.step << ',' << num(r.mean_return) << ',' << num(r.success_rate) << ',' << num(r.alpha) << ','
       << num(r.critic_loss) << ',' << num(r.actor_loss) << '\n';
  }
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

namespace {

struct Series {
  std::vector<long> steps;
  std::vector<std::vector<double>> per_seed;  // [seed][point]
  std::vector<double> mean, stddev;
};

Series collect(const std::vector<std::vector<EvalReport>>& seeds, double EvalReport::* field) {
  Series s;
  if (seeds.empty()) return s;
  const std::size_t points = seeds.front().size();
  for (const auto& r : seeds.front()) s.steps.push_back(r.step);
  for (const auto& seed : seeds) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < std::min(points, seed.size()); ++i) vals.push_back(seed[i].*field);
    vals.resize(points, vals.empty() ? 0.0 : vals.back());
    s.per_seed.push_back(std::move(vals));
  }
  for (std::size_t i = 0; i < points; ++i) {
    double m = 0.0;
    for (const auto& seed : s.per_seed) m += seed[i];
    m /= s.per_seed.size();
    double var = 0.0;
    for (const auto& seed : s.per_seed) var += (seed[i] - m) * (seed[i] - m);
    var /= s.per_seed.size();
    s.mean.push_back(m);
    s.stddev.push_back(std::sqrt(var));
  }
  return s;
}

struct Panel {
  double x0, y0, w, h;           // plot area in svg coordinates
  double xmin, xmax, ymin, ymax;  // data ranges

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin + 1e-300) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin + 1e-300) * h; }
};

void draw_panel(std::ofstream& os, const Series& s, Panel p, const std::string& title, const std::string& color) {
  os << "<rect x='" << p.x0 << "' y='" << p.y0 << "' width='" << p.w << "' height='" << p.h
     << "' fill='none' stroke='#444'/>\n";
  os << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 - 8 << "' text-anchor='middle' font-size='13'>" << title
     << "</text>\n";
  // axis labels: min/max ticks only
  os << "<text x='" << p.x0 - 6 << "' y='" << p.py(p.ymin) + 4 << "' text-anchor='end' font-size='10'>" << p.ymin
     << "</text>\n";
  os << "<text x='" << p.x0 - 6 << "' y='" << p.py(p.ymax) + 4 << "' text-anchor='end' font-size='10'>" << p.ymax
     << "</text>\n";
  os << "<text x='" << p.px(p.xmin) << "' y='" << p.y0 + p.h + 14 << "' text-anchor='middle' font-size='10'>"
     << static_cast<long>(p.xmin) << "</text>\n";
  os << "<text x='" << p.px(p.xmax) << "' y='" << p.y0 + p.h + 14 << "' text-anchor='middle' font-size='10'>"
     << static_cast<long>(p.xmax) << "</text>\n";
  if (s.steps.empty()) return;
  auto polyline = [&](const std::vector<double>& ys, const std::string& stroke, double width, double opacity) {
    os << "<polyline fill='none' stroke='" << stroke << "' stroke-width='" << width << "' opacity='" << opacity
       << "' points='";
    for (std::size_t i = 0; i < s.steps.size(); ++i) os << p.px(static_cast<double>(s.steps[i])) << ',' << p.py(ys[i]) << ' ';
    os << "'/>\n";
  };
  if (s.per_seed.size() > 1) {
    os << "<polygon fill='" << color << "' opacity='0.18' stroke='none' points='";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      os << p.px(static_cast<double>(s.steps[i])) << ',' << p.py(s.mean[i] + s.stddev[i]) << ' ';
    for (std::size_t i = s.steps.size(); i-- > 0;)
      os << p.px(static_cast<double>(s.steps[i])) << ',' << p.py(s.mean[i] - s.stddev[i]) << ' ';
    os << "'/>\n";
    for (const auto& seed : s.per_seed) polyline(seed, color, 0.6, 0.35);
  }
  polyline(s.mean, color, 1.8, 1.0);
}

}  // namespace

void write_metrics_svg(const std::vector<std::vector<EvalReport>>& seeds, const std::string& path) {
  Series ret = collect(seeds, &EvalReport::mean_return);
  Series suc = collect(seeds, &EvalReport::success_rate);
  auto os = open_out(path);
  const double W = 720, H = 320;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
     << "' font-family='sans-serif'>\n";
  os << "<rect width='" << W << "' height='" << H << "' fill='white'/>\n";

  auto ranged = [](const Series& s, bool clip01) {
    double lo = 0.0, hi = 1.0;
    if (!s.mean.empty()) {
      lo = hi = s.mean.front();
      for (const auto& seed : s.per_seed)
        for (double v : seed) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
    }
    if (clip01) {
      lo = 0.0;
      hi = 1.0;
    }
    if (lo == hi) {
      lo -= 1.0;
      hi += 1.0;
    }
    return std::pair(lo, hi);
  };

  const double xmin = ret.steps.empty() ? 0.0 : static_cast<double>(ret.steps.front());
  const double xmax = ret.steps.empty() ? 1.0 : static_cast<double>(ret.steps.back());
  auto [rlo, rhi] = ranged(ret, false);
  Panel p1{55, 30, 265, 240, xmin, std::max(xmax, xmin + 1), rlo, rhi};
  Panel p2{415, 30, 265, 240, xmin, std::max(xmax, xmin + 1), 0.0, 1.0};
  draw_panel(os, ret, p1, "mean return", "#1f77b4");
  draw_panel(os, suc, p2, "success rate", "#d62728");
  os << "</svg>\n";
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace stlncs
