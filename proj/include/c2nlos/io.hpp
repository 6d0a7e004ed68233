#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "c2nlos/array.hpp"
#include "c2nlos/forward.hpp"
#include "c2nlos/localize.hpp"

namespace c2nlos {

using Json = nlohmann::json;

// ===================================================================
// tensor container: one UTF-8 JSON header line terminated by '\n',
// then the payload as raw little-endian float32, row-major, last
// axis fastest. Header carries dims, per-axis names and units, the
// bin-axis kind, and a free-form geometry block.
// ===================================================================

struct TensorFile {
    std::vector<int> dims;
    std::vector<std::string> axis_names;
    std::vector<std::string> axis_units;
    std::string axis_kind = "none";  // "time" | "v" | "none"
    Json geometry = Json::object();
    std::vector<float> data;

    std::size_t size() const {
        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }
};

// Throws MalformedHeader (bad JSON / missing fields), UnsupportedDtype
// (anything but "f32le"), SizeMismatch (payload length != 4 * prod(dims)).
TensorFile read_tensor(const std::string& path);
void write_tensor(const TensorFile& t, const std::string& path);

// converters between the in-memory scan types and the disk container
TensorFile to_tensor(const TransientSinogram& sino);
TensorFile to_tensor(const ConfocalTransient& ct);
TensorFile to_tensor(const Array2D<float>& image, double extent, double pixel_pitch);
TransientSinogram sinogram_from_tensor(const TensorFile& t);
ConfocalTransient confocal_from_tensor(const TensorFile& t);

// ===================================================================
// scene description JSON
//
//   {
//     "scatterers": [ { "position": [x, y, z], "albedo": a }, ... ],
//     "scan": { "circle": { "radius": r, "center": [x,y,z], "angles": n } }
//           | { "grid": { "nx": n, "ny": n, "width": w, "height": h,
//                         "center": [x,y,z] } },
//     "time": { "bins": n, "bin_width": seconds }
//   }
//
// Exactly one scan block; albedos must be >= 0.
// ===================================================================

struct SceneFile {
    Scene scene;
    ScanCircle circle;
    GridSpec grid;
    bool has_circle = false;
    bool has_grid = false;
    TimeAxis time_axis;
};

SceneFile parse_scene(const Json& doc);  // throws MalformedHeader
SceneFile load_scene(const std::string& path);

// ===================================================================
// image emission: 8-bit grayscale PNG plus a sidecar JSON ("<path>.json")
// recording the normalization actually applied
// ===================================================================

enum class NormKind { MinMax, FixedRange };

struct Normalization {
    NormKind kind = NormKind::MinMax;
    double lo = 0.0;  // bounds used for FixedRange; filled in for MinMax
    double hi = 1.0;
};

// MinMax maps [min, max] -> [0, 255] and a constant image to mid-gray 128;
// FixedRange clamps into [lo, hi] first. Returns the recorded bounds.
Normalization emit_png(const Array2D<float>& image, const Normalization& norm,
                       const std::string& path);
Normalization read_normalization(const std::string& sidecar_path);

void write_detections_csv(const std::vector<Detection>& dets, const std::string& path);

// ===================================================================
// command line: simulate | localize | radon2d | invert2d | recon3d |
// trilaterate | metrics. Exit 0 on success, 1 on usage errors, 2 on
// runtime failures. Every run writes a manifest JSON next to its
// primary output (inputs, effective config, versions, timings).
// ===================================================================

int cli_dispatch(int argc, const char* const* argv);

}  // namespace c2nlos
