#include "ggs/viz.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace ggs {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

} // namespace

Tensor heatmap(const LossAttentionMap& lam) {
    Tensor out(3, lam.h, lam.w);
    for (int y = 0; y < lam.h; ++y)
        for (int x = 0; x < lam.w; ++x) {
            const double v = lam.at(y, x);
            out.at(0, y, x) = clamp01(1.5 - std::fabs(4.0 * v - 3.0));
            out.at(1, y, x) = clamp01(1.5 - std::fabs(4.0 * v - 2.0));
            out.at(2, y, x) = clamp01(1.5 - std::fabs(4.0 * v - 1.0));
        }
    return out;
}

Tensor overlay_heatmap(const Tensor& image, const LossAttentionMap& lam, double alpha) {
    if (image.height() != lam.h || image.width() != lam.w)
        throw UsageError("overlay_heatmap: map and image sizes differ");
    const Tensor heat = heatmap(lam);
    Tensor out(3, lam.h, lam.w);
    for (int c = 0; c < 3; ++c) {
        const int src = std::min(c, image.channels() - 1);
        for (int y = 0; y < lam.h; ++y)
            for (int x = 0; x < lam.w; ++x)
                out.at(c, y, x) =
                    alpha * heat.at(c, y, x) + (1.0 - alpha) * image.at(src, y, x);
    }
    return out;
}

void draw_dashed_box(Tensor& image, const Box& box, int dash) {
    const int h = image.height(), w = image.width();
    if (dash < 1) dash = 1;
    auto put = [&](int y, int x) {
        if (y < 0 || y >= h || x < 0 || x >= w) return;
        for (int c = 0; c < image.channels(); ++c) image.at(c, y, x) = 1.0;
    };
    const int x1 = box.x + box.w - 1, y1 = box.y + box.h - 1;
    for (int i = 0; i < box.w; ++i) {
        if ((i / dash) % 2 == 0) {
            put(box.y, box.x + i);
            put(y1, box.x + i);
        }
    }
    for (int i = 0; i < box.h; ++i) {
        if ((i / dash) % 2 == 0) {
            put(box.y + i, box.x);
            put(box.y + i, x1);
        }
    }
}

Tensor hconcat_panels(const std::vector<Tensor>& panels, int gap) {
    if (panels.empty()) throw UsageError("hconcat_panels: no panels");
    const int h = panels.front().height();
    int total_w = gap * int(panels.size() - 1);
    for (const Tensor& p : panels) {
        if (p.height() != h) throw UsageError("hconcat_panels: panel heights differ");
        total_w += p.width();
    }
    Tensor out(3, h, total_w);
    out.fill(1.0);
    int x0 = 0;
    for (const Tensor& p : panels) {
        for (int c = 0; c < 3; ++c) {
            const int src = std::min(c, p.channels() - 1);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < p.width(); ++x) out.at(c, y, x0 + x) = p.at(src, y, x);
        }
        x0 += p.width() + gap;
    }
    return out;
}

void write_line_plot(const std::string& path, const std::string& title,
                     const std::vector<Series>& series, int width, int height) {
    if (series.empty()) throw UsageError("write_line_plot: no series");
    for (const Series& s : series)
        if (s.x.size() != s.y.size() || s.x.empty())
            throw UsageError("write_line_plot: series '" + s.label + "' is empty or ragged");

    double xmin = series[0].x[0], xmax = xmin, ymin = series[0].y[0], ymax = ymin;
    for (const Series& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const int ml = 64, mr = 16, mt = 36, mb = 44;
    cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));
    auto px = [&](double x) {
        return ml + int(std::lround((x - xmin) / (xmax - xmin) * (width - ml - mr)));
    };
    auto py = [&](double y) {
        return height - mb - int(std::lround((y - ymin) / (ymax - ymin) * (height - mt - mb)));
    };

    const cv::Scalar axis(60, 60, 60);
    cv::line(canvas, {ml, mt}, {ml, height - mb}, axis, 1);
    cv::line(canvas, {ml, height - mb}, {width - mr, height - mb}, axis, 1);
    cv::putText(canvas, title, {ml, mt - 12}, cv::FONT_HERSHEY_SIMPLEX, 0.5, axis, 1,
                cv::LINE_AA);

    char label[48];
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        cv::line(canvas, {px(xv), height - mb}, {px(xv), height - mb + 4}, axis, 1);
        std::snprintf(label, sizeof(label), "%g", xv);
        cv::putText(canvas, label, {px(xv) - 12, height - mb + 18}, cv::FONT_HERSHEY_SIMPLEX,
                    0.38, axis, 1, cv::LINE_AA);
        cv::line(canvas, {ml - 4, py(yv)}, {ml, py(yv)}, axis, 1);
        std::snprintf(label, sizeof(label), "%.3g", yv);
        cv::putText(canvas, label, {6, py(yv) + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.38, axis, 1,
                    cv::LINE_AA);
    }

    const cv::Scalar palette[6] = {{180, 60, 30},  {40, 60, 200},  {60, 160, 60},
                                   {20, 140, 220}, {160, 60, 160}, {60, 170, 170}};
    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const cv::Scalar color = palette[si % 6];
        for (std::size_t i = 0; i + 1 < s.x.size(); ++i)
            cv::line(canvas, {px(s.x[i]), py(s.y[i])}, {px(s.x[i + 1]), py(s.y[i + 1])}, color,
                     1, cv::LINE_AA);
        if (s.x.size() == 1)
            cv::circle(canvas, {px(s.x[0]), py(s.y[0])}, 2, color, cv::FILLED);
        cv::putText(canvas, s.label, {width - mr - 150, mt + 16 * int(si) + 4},
                    cv::FONT_HERSHEY_SIMPLEX, 0.4, color, 1, cv::LINE_AA);
    }

    const std::filesystem::path target(path);
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    if (!cv::imwrite(path, canvas)) throw DataError("cannot write plot '" + path + "'");
}

} // namespace ggs
