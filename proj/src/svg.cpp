#include "finstab/svg.hpp"
#include "finstab/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace finstab {

namespace {

constexpr double kWidth = 720;
constexpr double kPanelH = 200;
constexpr double kMarginL = 70;
constexpr double kMarginR = 20;
constexpr double kGap = 40;

struct Series {
    std::vector<double> y;
    std::string colour;
    std::string label;
    bool dashed = false;
};

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

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

void panel(std::ostringstream& os, double top, const std::string& title, const std::vector<double>& t,
           const std::vector<Series>& series) {
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& s : series) {
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            if (first) {
                lo = hi = v;
                first = false;
            }
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-300) hi = lo + 1.0;
    const double t0 = t.empty() ? 0.0 : t.front();
    const double t1 = t.empty() || t.back() <= t0 ? t0 + 1.0 : t.back();
    const double w = kWidth - kMarginL - kMarginR;
    auto px = [&](double tv) { return kMarginL + (tv - t0) / (t1 - t0) * w; };
    auto py = [&](double v) { return top + kPanelH - (v - lo) / (hi - lo) * kPanelH; };

    os << "<rect x=\"" << kMarginL << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << kPanelH
       << "\" fill=\"none\" stroke=\"#888\"/>\n";
    os << "<text x=\"" << kMarginL << "\" y=\"" << top - 6 << "\" font-size=\"13\">" << escape(title) << "</text>\n";
    os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << top + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
       << fmt(hi) << "</text>\n";
    os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << top + kPanelH << "\" font-size=\"10\" text-anchor=\"end\">"
       << fmt(lo) << "</text>\n";
    os << "<text x=\"" << kMarginL << "\" y=\"" << top + kPanelH + 14 << "\" font-size=\"10\">" << fmt(t0)
       << "</text>\n";
    os << "<text x=\"" << kWidth - kMarginR << "\" y=\"" << top + kPanelH + 14
       << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(t1) << "</text>\n";

    double legend_x = kWidth - kMarginR - 8;
    for (const auto& s : series) {
        os << "<polyline fill=\"none\" stroke=\"" << s.colour << "\" stroke-width=\"1.5\"";
        if (s.dashed) os << " stroke-dasharray=\"5,3\"";
        os << " points=\"";
        for (std::size_t i = 0; i < t.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            os << fmt(px(t[i])) << ',' << fmt(py(s.y[i])) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << legend_x << "\" y=\"" << top + 14 << "\" font-size=\"11\" text-anchor=\"end\" fill=\""
           << s.colour << "\">" << escape(s.label) << "</text>\n";
        legend_x -= 12.0 + 7.0 * static_cast<double>(s.label.size());
    }
}

}  // namespace

std::string render_trajectory_svg(const Trajectory& traj, const PlotOptions& opts) {
    const double height = 40 + 3 * (kPanelH + kGap + 10);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << kWidth << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" font-size=\"15\" text-anchor=\"middle\">" << escape(opts.title)
       << "</text>\n";

    std::vector<Series> v_series{{traj.lyapunov, "#1f77b4", "V(t)"}};
    if (opts.rate && !traj.lyapunov.empty()) {
        const double e0 = std::pow(std::max(traj.lyapunov[0], 0.0), opts.mu);
        Series env{{}, "#d62728", "envelope", true};
        for (double t : traj.times) {
            const double r = std::max(e0 - 2.0 * *opts.rate * opts.mu * t, 0.0);
            env.y.push_back(std::pow(r, 1.0 / opts.mu));
        }
        v_series.push_back(std::move(env));
    }
    double top = 50;
    panel(os, top, "Lyapunov function", traj.times, v_series);
    top += kPanelH + kGap + 10;
    panel(os, top, "state norm", traj.times, {{traj.norms, "#2ca02c", "|y(t)|"}});
    top += kPanelH + kGap + 10;
    Series u{{}, "#9467bd", "control"};
    for (const auto& c : traj.controls) u.y.push_back(c.size() ? c(0) : 0.0);
    panel(os, top, "control", traj.times, {u});
    os << "</svg>\n";
    return os.str();
}

}  // namespace finstab
