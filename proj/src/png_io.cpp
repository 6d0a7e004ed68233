#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "c2nlos/errors.hpp"
#include "c2nlos/io.hpp"

namespace c2nlos {

namespace {

void write_gray8(const std::vector<unsigned char>& pixels, int width, int height,
                 const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw Error("png: cannot open '" + path + "' for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error("png: allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw Error("png: encoding '" + path + "' failed");
    }

    png_init_io(png, fp);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int i = 0; i < height; ++i)
        png_write_row(png, const_cast<png_bytep>(&pixels[static_cast<std::size_t>(i) * width]));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

Normalization emit_png(const Array2D<float>& image, const Normalization& norm,
                       const std::string& path) {
    Normalization used = norm;
    if (norm.kind == NormKind::MinMax) {
        float lo = image.v.empty() ? 0.0f : image.v[0];
        float hi = lo;
        for (float x : image.v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        used.lo = lo;
        used.hi = hi;
    }

    std::vector<unsigned char> pixels(image.v.size());
    double span = used.hi - used.lo;
    for (std::size_t i = 0; i < image.v.size(); ++i) {
        if (span <= 0.0) {
            pixels[i] = 128;  // constant image: mid-gray
            continue;
        }
        double q = (image.v[i] - used.lo) / span;
        q = q < 0.0 ? 0.0 : (q > 1.0 ? 1.0 : q);
        pixels[i] = static_cast<unsigned char>(std::lround(q * 255.0));
    }
    write_gray8(pixels, image.cols, image.rows, path);

    Json sidecar{{"normalization", used.kind == NormKind::MinMax ? "minmax" : "fixed-range"},
                 {"lo", used.lo},
                 {"hi", used.hi},
                 {"width", image.cols},
                 {"height", image.rows}};
    std::ofstream f(path + ".json");
    if (!f) throw Error("png: cannot write sidecar for '" + path + "'");
    f << sidecar.dump(2) << '\n';
    return used;
}

Normalization read_normalization(const std::string& sidecar_path) {
    std::ifstream f(sidecar_path);
    if (!f) throw Error("png: cannot open sidecar '" + sidecar_path + "'");
    Json doc = Json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw MalformedHeader("png: sidecar is not valid JSON");
    Normalization norm;
    std::string kind = doc.at("normalization").get<std::string>();
    if (kind == "minmax")
        norm.kind = NormKind::MinMax;
    else if (kind == "fixed-range")
        norm.kind = NormKind::FixedRange;
    else
        throw MalformedHeader("png: unknown normalization '" + kind + "'");
    norm.lo = doc.at("lo").get<double>();
    norm.hi = doc.at("hi").get<double>();
    return norm;
}

void write_detections_csv(const std::vector<Detection>& dets, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("csv: cannot open '" + path + "' for writing");
    f << "x,y,z,score,alpha,beta,gamma\n";
    char line[256];
    for (const Detection& d : dets) {
        std::snprintf(line, sizeof(line), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", d.position.x,
                      d.position.y, d.position.z, d.score, d.params.alpha, d.params.beta,
                      d.params.gamma);
        f << line;
    }
}

}  // namespace c2nlos
