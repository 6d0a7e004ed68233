#include <cstdint>
#include <cstring>
#include <fstream>

#include "c2nlos/errors.hpp"
#include "c2nlos/io.hpp"

namespace c2nlos {

namespace {

// serialize floats explicitly little-endian so the container means the
// same bytes on any host
void floats_to_le(const std::vector<float>& src, std::vector<unsigned char>& out) {
    out.resize(src.size() * 4);
    for (std::size_t i = 0; i < src.size(); ++i) {
        std::uint32_t u;
        std::memcpy(&u, &src[i], 4);
        out[4 * i + 0] = static_cast<unsigned char>(u & 0xff);
        out[4 * i + 1] = static_cast<unsigned char>((u >> 8) & 0xff);
        out[4 * i + 2] = static_cast<unsigned char>((u >> 16) & 0xff);
        out[4 * i + 3] = static_cast<unsigned char>((u >> 24) & 0xff);
    }
}

void le_to_floats(const std::vector<unsigned char>& src, std::vector<float>& out) {
    out.resize(src.size() / 4);
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::uint32_t u = static_cast<std::uint32_t>(src[4 * i + 0]) |
                          (static_cast<std::uint32_t>(src[4 * i + 1]) << 8) |
                          (static_cast<std::uint32_t>(src[4 * i + 2]) << 16) |
                          (static_cast<std::uint32_t>(src[4 * i + 3]) << 24);
        std::memcpy(&out[i], &u, 4);
    }
}

Json point_json(const CartesianPoint& p) { return Json::array({p.x, p.y, p.z}); }

CartesianPoint point_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw MalformedHeader("tensor: point must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json time_json(const TimeAxis& axis) {
    return Json{{"bins", axis.num_bins}, {"bin_width", axis.bin_width}};
}

TimeAxis time_from_json(const Json& j) {
    TimeAxis axis;
    axis.num_bins = j.at("bins").get<int>();
    axis.bin_width = j.at("bin_width").get<double>();
    return axis;
}

}  // namespace

void write_tensor(const TensorFile& t, const std::string& path) {
    if (t.data.size() != t.size()) throw SizeMismatch("tensor: data does not match dims");
    Json header{{"dims", t.dims},
                {"axes", t.axis_names},
                {"units", t.axis_units},
                {"axis_kind", t.axis_kind},
                {"geometry", t.geometry},
                {"dtype", "f32le"}};
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("tensor: cannot open '" + path + "' for writing");
    f << header.dump() << '\n';
    std::vector<unsigned char> bytes;
    floats_to_le(t.data, bytes);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("tensor: write to '" + path + "' failed");
}

TensorFile read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("tensor: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line)) throw MalformedHeader("tensor: missing header line");

    Json header = Json::parse(line, nullptr, false);
    if (header.is_discarded()) throw MalformedHeader("tensor: header is not valid JSON");
    if (!header.contains("dims") || !header["dims"].is_array() || header["dims"].empty())
        throw MalformedHeader("tensor: header lacks dims");
    if (!header.contains("dtype") || !header["dtype"].is_string())
        throw MalformedHeader("tensor: header lacks dtype");
    std::string dtype = header["dtype"].get<std::string>();
    if (dtype != "f32le") throw UnsupportedDtype("tensor: dtype '" + dtype + "' not supported");

    TensorFile t;
    for (const Json& d : header["dims"]) {
        if (!d.is_number_integer() || d.get<int>() <= 0)
            throw MalformedHeader("tensor: dims must be positive integers");
        t.dims.push_back(d.get<int>());
    }
    if (header.contains("axes")) t.axis_names = header["axes"].get<std::vector<std::string>>();
    if (header.contains("units")) t.axis_units = header["units"].get<std::vector<std::string>>();
    if (header.contains("axis_kind")) t.axis_kind = header["axis_kind"].get<std::string>();
    if (header.contains("geometry")) t.geometry = header["geometry"];

    std::size_t want = t.size() * 4;
    std::vector<unsigned char> bytes(want);
    f.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(want));
    if (static_cast<std::size_t>(f.gcount()) != want)
        throw SizeMismatch("tensor: payload shorter than dims declare");
    if (f.peek() != std::ifstream::traits_type::eof())
        throw SizeMismatch("tensor: payload longer than dims declare");
    le_to_floats(bytes, t.data);
    return t;
}

TensorFile to_tensor(const TransientSinogram& sino) {
    TensorFile t;
    t.dims = {sino.data.rows, sino.data.cols};
    t.axis_names = {"angle", "bin"};
    bool v = sino.axis_kind == AxisKind::V;
    t.axis_units = {"rad", v ? "m^2" : "s"};
    t.axis_kind = v ? "v" : "time";
    t.geometry = Json{{"circle",
                       Json{{"radius", sino.circle.radius},
                            {"center", point_json(sino.circle.center)},
                            {"angles", sino.circle.num_angles}}},
                      {"time", time_json(sino.time_axis)}};
    if (v) t.geometry["v_max"] = sino.v_max;
    t.data = sino.data.v;
    return t;
}

TensorFile to_tensor(const ConfocalTransient& ct) {
    TensorFile t;
    t.dims = {ct.data.n0, ct.data.n1, ct.data.n2};
    t.axis_names = {"y", "x", "bin"};
    bool v = ct.axis_kind == AxisKind::V;
    t.axis_units = {"m", "m", v ? "m^2" : "s"};
    t.axis_kind = v ? "v" : "time";
    t.geometry = Json{{"grid",
                       Json{{"nx", ct.grid.nx},
                            {"ny", ct.grid.ny},
                            {"width", ct.grid.width},
                            {"height", ct.grid.height},
                            {"center", point_json(ct.grid.center)}}},
                      {"time", time_json(ct.time_axis)}};
    if (v) t.geometry["v_max"] = ct.v_max;
    t.data = ct.data.v;
    return t;
}

TensorFile to_tensor(const Array2D<float>& image, double extent, double pixel_pitch) {
    TensorFile t;
    t.dims = {image.rows, image.cols};
    t.axis_names = {"y", "x"};
    t.axis_units = {"m", "m"};
    t.geometry = Json{{"extent", extent}, {"pixel_pitch", pixel_pitch}};
    t.data = image.v;
    return t;
}

TransientSinogram sinogram_from_tensor(const TensorFile& t) {
    if (t.dims.size() != 2) throw MalformedHeader("tensor: sinogram needs 2 dims");
    if (!t.geometry.contains("circle")) throw MalformedHeader("tensor: geometry lacks circle");
    const Json& c = t.geometry["circle"];
    TransientSinogram sino;
    sino.circle.radius = c.at("radius").get<double>();
    sino.circle.center = point_from_json(c.at("center"));
    sino.circle.num_angles = c.at("angles").get<int>();
    if (sino.circle.num_angles != t.dims[0])
        throw SizeMismatch("tensor: circle angles do not match rows");
    if (t.geometry.contains("time")) sino.time_axis = time_from_json(t.geometry["time"]);
    if (t.axis_kind == "v") {
        sino.axis_kind = AxisKind::V;
        if (!t.geometry.contains("v_max")) throw MalformedHeader("tensor: v axis lacks v_max");
        sino.v_max = t.geometry["v_max"].get<double>();
    }
    sino.data = Array2D<float>(t.dims[0], t.dims[1]);
    sino.data.v = t.data;
    return sino;
}

ConfocalTransient confocal_from_tensor(const TensorFile& t) {
    if (t.dims.size() != 3) throw MalformedHeader("tensor: confocal scan needs 3 dims");
    if (!t.geometry.contains("grid")) throw MalformedHeader("tensor: geometry lacks grid");
    const Json& g = t.geometry["grid"];
    ConfocalTransient ct;
    ct.grid.nx = g.at("nx").get<int>();
    ct.grid.ny = g.at("ny").get<int>();
    ct.grid.width = g.at("width").get<double>();
    ct.grid.height = g.at("height").get<double>();
    ct.grid.center = point_from_json(g.at("center"));
    if (ct.grid.ny != t.dims[0] || ct.grid.nx != t.dims[1])
        throw SizeMismatch("tensor: grid does not match dims");
    if (t.geometry.contains("time")) ct.time_axis = time_from_json(t.geometry["time"]);
    if (t.axis_kind == "v") {
        ct.axis_kind = AxisKind::V;
        if (!t.geometry.contains("v_max")) throw MalformedHeader("tensor: v axis lacks v_max");
        ct.v_max = t.geometry["v_max"].get<double>();
    }
    ct.data = Array3D<float>(t.dims[0], t.dims[1], t.dims[2]);
    ct.data.v = t.data;
    return ct;
}

}  // namespace c2nlos
