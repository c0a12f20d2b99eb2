#include "mvem/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvem/io.hpp"

namespace mvem {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 24.0;
constexpr double kTop = 48.0;
constexpr double kBottom = 64.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Axis {
  double lo, hi;  // decades (log10)
  double pixel_lo, pixel_hi;
  double map(double v) const {
    return pixel_lo + (std::log10(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

Axis make_axis(double vmin, double vmax, double p0, double p1) {
  double lo = std::floor(std::log10(vmin));
  double hi = std::ceil(std::log10(vmax));
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, p0, p1};
}

}  // namespace

std::string render_loglog_svg(const LogLogPlot& plot) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0.0;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (!(s.xs[i] > 0.0) || !(s.ys[i] > 0.0) || !std::isfinite(s.xs[i]) ||
          !std::isfinite(s.ys[i])) {
        continue;
      }
      xmin = std::min(xmin, s.xs[i]);
      xmax = std::max(xmax, s.xs[i]);
      ymin = std::min(ymin, s.ys[i]);
      ymax = std::max(ymax, s.ys[i]);
    }
  }
  if (!(xmax > 0.0)) xmin = 1.0, xmax = 10.0, ymin = 1.0, ymax = 10.0;
  const Axis ax = make_axis(xmin, xmax, kLeft, kWidth - kRight);
  const Axis ay = make_axis(ymin, ymax, kHeight - kBottom, kTop);

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-size=\"15\">" << escape(plot.title) << "</text>\n";

  // Decade grid and tick labels.
  os << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double e = ax.lo; e <= ax.hi; e += 1.0) {
    const double x = ax.map(std::pow(10.0, e));
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << kHeight - kBottom << "\"/>\n";
  }
  for (double e = ay.lo; e <= ay.hi; e += 1.0) {
    const double y = ay.map(std::pow(10.0, e));
    os << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\""
       << kWidth - kRight << "\" y2=\"" << fmt(y) << "\"/>\n";
  }
  os << "</g>\n<g fill=\"#333333\">\n";
  for (double e = ax.lo; e <= ax.hi; e += 1.0) {
    os << "<text x=\"" << fmt(ax.map(std::pow(10.0, e))) << "\" y=\""
       << kHeight - kBottom + 18 << "\" text-anchor=\"middle\">1e" << e
       << "</text>\n";
  }
  for (double e = ay.lo; e <= ay.hi; e += 1.0) {
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(ay.map(std::pow(10.0, e)) + 4)
       << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  os << "</g>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
     << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
     << "\" fill=\"none\" stroke=\"#333333\"/>\n"
     << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\""
     << kHeight - 20 << "\" text-anchor=\"middle\">" << escape(plot.x_label)
     << "</text>\n"
     << "<text transform=\"translate(20," << (kTop + kHeight - kBottom) / 2
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label)
     << "</text>\n";

  std::size_t color = 0;
  for (const auto& s : plot.series) {
    const char* c = kColors[color++ % std::size(kColors)];
    std::ostringstream pts;
    os << "<g stroke=\"" << c << "\" fill=\"" << c << "\">\n";
    for (std::size_t i = 0; i < s.xs.size() && i < s.ys.size(); ++i) {
      if (!(s.xs[i] > 0.0) || !(s.ys[i] > 0.0) || !std::isfinite(s.ys[i])) continue;
      const double x = ax.map(s.xs[i]), y = ay.map(s.ys[i]);
      pts << fmt(x) << ',' << fmt(y) << ' ';
      os << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"3\"/>\n";
      if (i < s.errs.size() && s.errs[i] > 0.0) {
        const double lo = s.ys[i] - s.errs[i], hi = s.ys[i] + s.errs[i];
        const double ylo = lo > 0.0 ? ay.map(std::max(lo, std::pow(10.0, ay.lo)))
                                    : kHeight - kBottom;
        os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(ylo) << "\" x2=\""
           << fmt(x) << "\" y2=\"" << fmt(ay.map(hi)) << "\"/>\n";
      }
    }
    os << "<polyline fill=\"none\" stroke-width=\"1.5\" points=\"" << pts.str()
       << "\"/>\n</g>\n";
  }

  double legend_y = kTop + 16;
  color = 0;
  for (const auto& s : plot.series) {
    const char* c = kColors[color++ % std::size(kColors)];
    os << "<text x=\"" << kLeft + 10 << "\" y=\"" << legend_y << "\" fill=\""
       << c << "\">" << escape(s.label) << "</text>\n";
    legend_y += 16;
  }

  if (plot.fit && xmax > xmin) {
    const auto& f = *plot.fit;
    const auto line_y = [&](double x) {
      return std::exp(f.intercept + f.slope * std::log(x));
    };
    os << "<line x1=\"" << fmt(ax.map(xmin)) << "\" y1=\"" << fmt(ay.map(line_y(xmin)))
       << "\" x2=\"" << fmt(ax.map(xmax)) << "\" y2=\"" << fmt(ay.map(line_y(xmax)))
       << "\" stroke=\"#555555\" stroke-dasharray=\"6,4\"/>\n"
       << "<text x=\"" << kWidth - kRight - 10 << "\" y=\"" << kTop + 16
       << "\" text-anchor=\"end\">slope " << fmt(f.slope) << " (R² "
       << fmt(f.r_squared) << ")</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

LogLogPlot sweep_plot(const SweepResult& result, const std::string& title) {
  LogLogPlot plot;
  plot.title = title;
  const bool by_delta = result.kind == "timestep";
  plot.x_label = by_delta ? "step size delta" : "particles N";
  plot.y_label = result.kind == "glivenko" ? "mean Wasserstein distance"
                                           : "mean strong error";
  PlotSeries s;
  s.label = result.kind;
  for (const auto& a : result.aggregates) {
    if (a.n_ok == 0) continue;
    s.xs.push_back(by_delta ? a.delta : static_cast<double>(a.n));
    s.ys.push_back(a.mean);
    s.errs.push_back(a.std_error);
  }
  plot.series.push_back(std::move(s));
  try {
    plot.fit = result.fit();
  } catch (const std::exception&) {
  }
  return plot;
}

}  // namespace mvem
