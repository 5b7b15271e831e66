#include "pmon/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

namespace pmon {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

double nice_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

class Canvas {
 public:
  Canvas(double x0, double x1, double y0, double y1) : x0_(x0), x1_(x1), y0_(y0), y1_(y1) {
    if (!(x1_ > x0_)) x1_ = x0_ + 1.0;
    if (!(y1_ > y0_)) y1_ = y0_ + 1.0;
  }

  double px(double x) const { return kLeft + (x - x0_) / (x1_ - x0_) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0_) / (y1_ - y0_) * (kHeight - kTop - kBottom); }

  void axes(const std::string& title, const std::string& xlabel, const std::string& ylabel) {
    out_ += fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{3}</text>\n",
        kWidth, kHeight, kWidth / 2.0, escape(title));
    out_ += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                        kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom);
    const double xs = nice_step(x1_ - x0_);
    for (double v = std::ceil(x0_ / xs) * xs; v <= x1_ + 1e-9 * xs; v += xs) {
      out_ += fmt::format(
          "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"#ccc\"/>"
          "<text x=\"{0:.2f}\" y=\"{3:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
          "text-anchor=\"middle\">{4:g}</text>\n",
          px(v), kTop, kHeight - kBottom, kHeight - kBottom + 16.0, v);
    }
    const double ys = nice_step(y1_ - y0_);
    for (double v = std::ceil(y0_ / ys) * ys; v <= y1_ + 1e-9 * ys; v += ys) {
      out_ += fmt::format(
          "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#ccc\"/>"
          "<text x=\"{3:.2f}\" y=\"{4:.2f}\" font-family=\"sans-serif\" font-size=\"11\" "
          "text-anchor=\"end\">{5:g}</text>\n",
          kLeft, py(v), kWidth - kRight, kLeft - 6.0, py(v) + 4.0, v);
    }
    out_ += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"13\" "
        "text-anchor=\"middle\">{}</text>\n",
        kLeft + (kWidth - kLeft - kRight) / 2.0, kHeight - 12.0, escape(xlabel));
    out_ += fmt::format(
        "<text x=\"16\" y=\"{0:.2f}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
        kTop + (kHeight - kTop - kBottom) / 2.0, escape(ylabel));
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
    out_ += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"", color);
    for (std::size_t k = 0; k < xs.size(); ++k) out_ += fmt::format("{:.2f},{:.2f} ", px(xs[k]), py(ys[k]));
    out_ += "\"/>\n";
  }

  void marker(double x, double y, const char* color) {
    out_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"none\" stroke=\"{}\"/>\n", px(x), py(y),
                        color);
  }

  void legend(std::size_t k, const std::string& label, const char* color) {
    const double y = kTop + 14.0 + 16.0 * static_cast<double>(k);
    out_ += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4:.2f}\" y=\"{5:.2f}\" font-family=\"sans-serif\" font-size=\"11\">{6}</text>\n",
        kWidth - kRight - 90.0, y, kWidth - kRight - 70.0, color, kWidth - kRight - 64.0, y + 4.0, escape(label));
  }

  std::string finish() { return out_ + "</svg>\n"; }

 private:
  double x0_, x1_, y0_, y1_;
  std::string out_;
};

const char* color(std::size_t n) { return kColors[n % (sizeof(kColors) / sizeof(kColors[0]))]; }

}  // namespace

std::string trajectory_svg(const CsvTable& trajectory, const CsvTable& events,
                           std::optional<std::pair<double, double>> window, const std::string& title) {
  const auto t = trajectory.numbers("t");
  std::size_t agents = 0;
  while (std::find(trajectory.header.begin(), trajectory.header.end(), "s_" + std::to_string(agents + 1)) !=
         trajectory.header.end())
    ++agents;

  const double lo = window ? window->first : (t.empty() ? 0.0 : t.front());
  const double hi = window ? window->second : (t.empty() ? 1.0 : t.back());
  auto inside = [&](double x) { return x >= lo && x <= hi; };

  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -ymin;
  std::vector<std::vector<double>> xs(agents), ys(agents);
  for (std::size_t n = 0; n < agents; ++n) {
    const auto s = trajectory.numbers("s_" + std::to_string(n + 1));
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!inside(t[k])) continue;
      xs[n].push_back(t[k]);
      ys[n].push_back(s[k]);
      ymin = std::min(ymin, s[k]);
      ymax = std::max(ymax, s[k]);
    }
  }
  if (!(ymax >= ymin)) ymin = 0.0, ymax = 1.0;
  const double pad = 0.05 * std::max(1.0, ymax - ymin);

  Canvas c(lo, hi, ymin - pad, ymax + pad);
  c.axes(title, "time", "position");
  for (std::size_t n = 0; n < agents; ++n) {
    c.polyline(xs[n], ys[n], color(n));
    c.legend(n, "agent " + std::to_string(n + 1), color(n));
  }

  // Switching markers at arrivals and departures.
  const std::size_t tc = events.column("time");
  const std::size_t kc = events.column("class");
  const std::size_t ac = events.column("agent");
  for (const auto& row : events.rows) {
    if (row[kc] != "arrival" && row[kc] != "departure") continue;
    const double te = std::stod(row[tc]);
    if (!inside(te)) continue;
    const std::size_t n = std::stoul(row[ac]) - 1;
    if (n >= agents) continue;
    const auto& X = xs[n];
    auto it = std::lower_bound(X.begin(), X.end(), te);
    if (it == X.end()) continue;
    c.marker(te, ys[n][static_cast<std::size_t>(it - X.begin())], color(n));
  }
  return c.finish();
}

std::string cost_svg(const CsvTable& iterations, const std::string& title) {
  const auto it = iterations.numbers("iteration");
  const auto J = iterations.numbers("cost");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : J) lo = std::min(lo, v), hi = std::max(hi, v);
  if (J.empty()) lo = 0.0, hi = 1.0;
  const double pad = 0.05 * std::max(1e-9, hi - lo);
  Canvas c(it.empty() ? 0.0 : it.front(), it.empty() ? 1.0 : std::max(it.back(), it.front() + 1.0), lo - pad,
           hi + pad);
  c.axes(title, "iteration", "J");
  c.polyline(it, J, color(0));
  return c.finish();
}

}  // namespace pmon
