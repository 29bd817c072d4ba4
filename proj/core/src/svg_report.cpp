#include "ergolab/svg_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ergolab/csv.hpp"
#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#d62728",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

/// Fixed-margin plot area with linear data-to-pixel mapping.
class Plot {
public:
    Plot(double x_lo, double x_hi, double y_lo, double y_hi)
        : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi) {}

    double px(double x) const {
        return left_ + (x - x_lo_) / (x_hi_ - x_lo_) * (width_ - left_ - right_);
    }
    double py(double y) const {
        return height_ - bottom_ -
               (y - y_lo_) / (y_hi_ - y_lo_) * (height_ - top_ - bottom_);
    }

    void polyline(const std::vector<std::pair<double, double>>& pts,
                  const std::string& color, double width, bool dashed) {
        if (pts.empty()) return;
        body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
              << num(width) << "\"";
        if (dashed) body_ << " stroke-dasharray=\"6,4\"";
        body_ << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            body_ << (i ? " " : "") << num(px(pts[i].first)) << ','
                  << num(py(pts[i].second));
        body_ << "\"/>\n";
    }

    void band(const std::vector<double>& xs, const std::vector<double>& lo,
              const std::vector<double>& hi, const std::string& color) {
        if (xs.empty()) return;
        body_ << "<polygon fill=\"" << color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i)
            body_ << (i ? " " : "") << num(px(xs[i])) << ',' << num(py(hi[i]));
        for (std::size_t i = xs.size(); i-- > 0;)
            body_ << ' ' << num(px(xs[i])) << ',' << num(py(lo[i]));
        body_ << "\"/>\n";
    }

    void vline(double x, const std::string& color, const std::string& label) {
        body_ << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(py(y_lo_))
              << "\" x2=\"" << num(px(x)) << "\" y2=\"" << num(py(y_hi_))
              << "\" stroke=\"" << color << "\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";
        if (!label.empty())
            body_ << "<text x=\"" << num(px(x) + 3) << "\" y=\"" << num(top_ + 12)
                  << "\" font-size=\"11\" fill=\"" << color << "\">" << label
                  << "</text>\n";
    }

    void hline(double y, const std::string& color, const std::string& label) {
        body_ << "<line x1=\"" << num(px(x_lo_)) << "\" y1=\"" << num(py(y))
              << "\" x2=\"" << num(px(x_hi_)) << "\" y2=\"" << num(py(y))
              << "\" stroke=\"" << color << "\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";
        if (!label.empty())
            body_ << "<text x=\"" << num(px(x_hi_) - 34) << "\" y=\"" << num(py(y) - 4)
                  << "\" font-size=\"11\" fill=\"" << color << "\">" << label
                  << "</text>\n";
    }

    void legend_entry(const std::string& label, const std::string& color, bool dashed) {
        double y = top_ + 14.0 + 16.0 * static_cast<double>(legend_count_++);
        double x = width_ - right_ - 150.0;
        body_ << "<line x1=\"" << num(x) << "\" y1=\"" << num(y - 4) << "\" x2=\""
              << num(x + 22) << "\" y2=\"" << num(y - 4) << "\" stroke=\"" << color
              << "\" stroke-width=\"2\"";
        if (dashed) body_ << " stroke-dasharray=\"6,4\"";
        body_ << "/>\n<text x=\"" << num(x + 27) << "\" y=\"" << num(y)
              << "\" font-size=\"11\" fill=\"#333\">" << label << "</text>\n";
    }

    std::string render(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<double>& x_ticks,
                       const std::vector<double>& y_ticks) const {
        std::ostringstream out;
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_)
            << "\" height=\"" << num(height_) << "\" viewBox=\"0 0 " << num(width_)
            << ' ' << num(height_) << "\" font-family=\"sans-serif\">\n"
            << "<rect width=\"" << num(width_) << "\" height=\"" << num(height_)
            << "\" fill=\"white\"/>\n";
        // frame
        out << "<rect x=\"" << num(left_) << "\" y=\"" << num(top_) << "\" width=\""
            << num(width_ - left_ - right_) << "\" height=\""
            << num(height_ - top_ - bottom_)
            << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
        for (double t : x_ticks) {
            out << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(height_ - bottom_)
                << "\" x2=\"" << num(px(t)) << "\" y2=\"" << num(height_ - bottom_ + 4)
                << "\" stroke=\"#444\"/>\n"
                << "<text x=\"" << num(px(t)) << "\" y=\"" << num(height_ - bottom_ + 17)
                << "\" font-size=\"11\" fill=\"#333\" text-anchor=\"middle\">" << num(t)
                << "</text>\n";
        }
        for (double t : y_ticks) {
            out << "<line x1=\"" << num(left_ - 4) << "\" y1=\"" << num(py(t))
                << "\" x2=\"" << num(left_) << "\" y2=\"" << num(py(t))
                << "\" stroke=\"#444\"/>\n"
                << "<text x=\"" << num(left_ - 7) << "\" y=\"" << num(py(t) + 4)
                << "\" font-size=\"11\" fill=\"#333\" text-anchor=\"end\">" << num(t)
                << "</text>\n";
        }
        out << "<text x=\"" << num((left_ + width_ - right_) / 2) << "\" y=\"18\""
            << " font-size=\"14\" fill=\"#111\" text-anchor=\"middle\">" << title
            << "</text>\n";
        out << "<text x=\"" << num((left_ + width_ - right_) / 2) << "\" y=\""
            << num(height_ - 14)
            << "\" font-size=\"12\" fill=\"#333\" text-anchor=\"middle\">" << x_label
            << "</text>\n";
        out << "<text x=\"16\" y=\"" << num((top_ + height_ - bottom_) / 2)
            << "\" font-size=\"12\" fill=\"#333\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << num((top_ + height_ - bottom_) / 2) << ")\">" << y_label << "</text>\n";
        out << body_.str();
        out << "</svg>\n";
        return out.str();
    }

private:
    double x_lo_, x_hi_, y_lo_, y_hi_;
    double width_ = 640.0, height_ = 440.0;
    double left_ = 62.0, right_ = 18.0, top_ = 34.0, bottom_ = 52.0;
    std::ostringstream body_;
    int legend_count_ = 0;
};

double parse_cell(const CsvTable& table, const std::vector<std::string>& row,
                  const std::string& column) {
    return std::stod(row[table.column_index(column)]);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("report: cannot write '" + path + "'");
    out << content;
}

std::vector<double> unit_ticks() { return {0.0, 0.25, 0.5, 0.75, 1.0}; }

std::vector<std::string> render_policy_charts(const ChartSpec& spec) {
    CsvTable table = read_csv_file(spec.csv_path);
    for (const char* col : {"experiment", "M", "p", "mean", "median", "q25", "q75"})
        table.column_index(col);
    if (table.rows.empty())
        throw DomainError("report: '" + spec.csv_path + "' has no data rows");

    std::map<long, std::vector<const std::vector<std::string>*>> by_m;
    for (const auto& row : table.rows)
        by_m[std::stol(row[table.column_index("M")])].push_back(&row);

    std::vector<std::string> written;
    for (const auto& [m, rows] : by_m) {
        Plot plot(0.0, 1.0, 0.0, 1.0);
        std::vector<double> xs, med, q25, q75, mean;
        for (const auto* row : rows) {
            xs.push_back(parse_cell(table, *row, "p"));
            med.push_back(parse_cell(table, *row, "median"));
            q25.push_back(parse_cell(table, *row, "q25"));
            q75.push_back(parse_cell(table, *row, "q75"));
            mean.push_back(parse_cell(table, *row, "mean"));
        }
        plot.band(xs, q25, q75, kPalette[0]);
        int color = 1;
        for (const auto& [label, curve] : spec.overlays) {
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < curve.grid.size(); ++i)
                pts.emplace_back(curve.grid[i], curve.values[i]);
            plot.polyline(pts, kPalette[color % 6], 1.6, true);
            plot.legend_entry(label, kPalette[color % 6], true);
            ++color;
        }
        std::vector<std::pair<double, double>> med_pts, mean_pts;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            med_pts.emplace_back(xs[i], med[i]);
            mean_pts.emplace_back(xs[i], mean[i]);
        }
        plot.polyline(mean_pts, "#7f7f7f", 1.0, false);
        plot.legend_entry("mean", "#7f7f7f", false);
        plot.polyline(med_pts, kPalette[0], 2.0, false);
        plot.legend_entry("median (IQR)", kPalette[0], false);
        if (spec.marker_p_e) plot.vline(*spec.marker_p_e, "#d62728", "p_E");
        if (spec.marker_p_t) plot.vline(*spec.marker_p_t, "#2ca02c", "p_T");

        std::string experiment = rows.front()->at(table.column_index("experiment"));
        std::string title = experiment + ", M=" + std::to_string(m);
        std::string svg = plot.render(title, "p", "policy", unit_ticks(), unit_ticks());
        std::string path =
            (std::filesystem::path(spec.out_dir) / ("policy_curve_m" + std::to_string(m) + ".svg"))
                .string();
        write_file(path, svg);
        written.push_back(path);
    }
    return written;
}

std::vector<std::string> render_indifference_chart(const ChartSpec& spec) {
    CsvTable table = read_csv_file(spec.csv_path);
    for (const char* col : {"M", "k", "p0", "residual", "p_E", "p_T"})
        table.column_index(col);
    if (table.rows.empty())
        throw DomainError("report: '" + spec.csv_path + "' has no data rows");

    std::vector<std::pair<double, double>> pts;
    double m_max = 1.0;
    for (const auto& row : table.rows) {
        double m = parse_cell(table, row, "M");
        pts.emplace_back(m, parse_cell(table, row, "p0"));
        m_max = std::max(m_max, m);
    }
    std::sort(pts.begin(), pts.end());

    Plot plot(0.0, m_max * 1.05, 0.0, 1.0);
    plot.hline(parse_cell(table, table.rows.front(), "p_E"), "#d62728", "p_E");
    plot.hline(parse_cell(table, table.rows.front(), "p_T"), "#2ca02c", "p_T");
    plot.polyline(pts, kPalette[0], 2.0, false);
    for (const auto& [x, y] : pts)
        plot.vline(x, "#cccccc", "");
    std::vector<double> m_ticks;
    for (const auto& [x, y] : pts) m_ticks.push_back(x);
    std::string svg = plot.render("fitted indifference point vs repetitions", "M",
                                  "p0", m_ticks, unit_ticks());
    std::string path =
        (std::filesystem::path(spec.out_dir) / "indifference_vs_m.svg").string();
    write_file(path, svg);
    return {path};
}

std::vector<std::string> render_mse_chart(const ChartSpec& spec) {
    CsvTable table = read_csv_file(spec.csv_path);
    for (const char* col : {"M", "mse_ev", "mse_kelly"}) table.column_index(col);
    if (table.rows.empty())
        throw DomainError("report: '" + spec.csv_path + "' has no data rows");

    std::vector<std::pair<double, double>> ev_pts, kelly_pts;
    double m_max = 1.0, y_max = 0.0;
    for (const auto& row : table.rows) {
        double m = parse_cell(table, row, "M");
        double ev = parse_cell(table, row, "mse_ev");
        double kelly = parse_cell(table, row, "mse_kelly");
        ev_pts.emplace_back(m, ev);
        kelly_pts.emplace_back(m, kelly);
        m_max = std::max(m_max, m);
        y_max = std::max({y_max, ev, kelly});
    }
    std::sort(ev_pts.begin(), ev_pts.end());
    std::sort(kelly_pts.begin(), kelly_pts.end());
    if (y_max <= 0.0) y_max = 1.0;

    Plot plot(0.0, m_max * 1.05, 0.0, y_max * 1.1);
    plot.polyline(ev_pts, kPalette[2], 2.0, false);
    plot.legend_entry("MSE vs expected-value policy", kPalette[2], false);
    plot.polyline(kelly_pts, kPalette[1], 2.0, false);
    plot.legend_entry("MSE vs optimal policy", kPalette[1], false);
    std::vector<double> m_ticks;
    for (const auto& [x, y] : ev_pts) m_ticks.push_back(x);
    std::vector<double> y_ticks;
    for (int i = 0; i <= 4; ++i) y_ticks.push_back(y_max * 1.1 * i / 4.0);
    std::string svg =
        plot.render("policy distance vs repetitions", "M", "MSE", m_ticks, y_ticks);
    std::string path = (std::filesystem::path(spec.out_dir) / "mse_vs_m.svg").string();
    write_file(path, svg);
    return {path};
}

}  // namespace

std::vector<std::string> render_chart(const ChartSpec& spec) {
    std::filesystem::create_directories(spec.out_dir);
    switch (spec.kind) {
        case ChartSpec::Kind::policy_curve: return render_policy_charts(spec);
        case ChartSpec::Kind::indifference_vs_m: return render_indifference_chart(spec);
        case ChartSpec::Kind::mse_vs_m: return render_mse_chart(spec);
    }
    throw DomainError("report: unknown chart kind");
}

}  // namespace ergolab
