#include "ggs/io.hpp"

#include <cmath>
#include <filesystem>

#include <opencv2/imgcodecs.hpp>

namespace ggs {

Tensor read_image(const std::string& path) {
    cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) throw DataError("cannot read image: " + path);
    Tensor out(3, bgr.rows, bgr.cols);
    for (int y = 0; y < bgr.rows; ++y) {
        const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < bgr.cols; ++x) {
            out.at(0, y, x) = row[x][2] / 255.0;
            out.at(1, y, x) = row[x][1] / 255.0;
            out.at(2, y, x) = row[x][0] / 255.0;
        }
    }
    return out;
}

void write_image(const std::string& path, const Tensor& image) {
    if (image.channels() != 3) throw UsageError("write_image expects 3 channels");
    cv::Mat bgr(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y) {
        cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width(); ++x) {
            auto q = [&](int c) {
                double v = std::clamp(image.at(c, y, x), 0.0, 1.0);
                return static_cast<unsigned char>(std::lround(v * 255.0));
            };
            row[x] = cv::Vec3b(q(2), q(1), q(0));
        }
    }
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    if (!cv::imwrite(path, bgr)) throw DataError("cannot write image: " + path);
}

Mask read_mask(const std::string& path) {
    cv::Mat gray = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (gray.empty()) throw DataError("cannot read mask: " + path);
    Mask out(gray.rows, gray.cols);
    for (int y = 0; y < gray.rows; ++y) {
        const unsigned char* row = gray.ptr<unsigned char>(y);
        for (int x = 0; x < gray.cols; ++x) out.at(y, x) = row[x];
    }
    return out;
}

void write_mask(const std::string& path, const Mask& mask) {
    cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y) {
        unsigned char* row = gray.ptr<unsigned char>(y);
        for (int x = 0; x < mask.width(); ++x) {
            const std::int32_t v = mask.at(y, x);
            if (v < 0 || v > 255) throw DataError("mask class index out of 8-bit range");
            row[x] = static_cast<unsigned char>(v);
        }
    }
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    if (!cv::imwrite(path, gray)) throw DataError("cannot write mask: " + path);
}

} // namespace ggs
