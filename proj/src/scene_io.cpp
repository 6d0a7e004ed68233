#include <fstream>

#include "c2nlos/errors.hpp"
#include "c2nlos/io.hpp"

namespace c2nlos {

namespace {

CartesianPoint point_from_json(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 3)
        throw MalformedHeader(std::string("scene: ") + what + " must be [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

SceneFile parse_scene(const Json& doc) {
    if (!doc.is_object()) throw MalformedHeader("scene: document must be a JSON object");
    SceneFile sf;

    if (!doc.contains("scatterers") || !doc["scatterers"].is_array())
        throw MalformedHeader("scene: missing scatterers array");
    for (const Json& s : doc["scatterers"]) {
        Scatterer sc;
        sc.position = point_from_json(s.at("position"), "scatterer position");
        sc.albedo = s.value("albedo", 1.0);
        if (sc.albedo < 0.0) throw MalformedHeader("scene: albedo must be >= 0");
        sf.scene.scatterers.push_back(sc);
    }

    if (!doc.contains("scan") || !doc["scan"].is_object())
        throw MalformedHeader("scene: missing scan block");
    const Json& scan = doc["scan"];
    if (scan.contains("circle") == scan.contains("grid"))
        throw MalformedHeader("scene: scan must hold exactly one of circle or grid");
    if (scan.contains("circle")) {
        const Json& c = scan["circle"];
        sf.circle.radius = c.at("radius").get<double>();
        if (c.contains("center")) sf.circle.center = point_from_json(c["center"], "circle center");
        sf.circle.num_angles = c.value("angles", 360);
        if (sf.circle.radius <= 0.0 || sf.circle.num_angles < 1)
            throw MalformedHeader("scene: circle needs radius > 0 and angles >= 1");
        sf.has_circle = true;
    } else {
        const Json& g = scan["grid"];
        sf.grid.nx = g.at("nx").get<int>();
        sf.grid.ny = g.at("ny").get<int>();
        sf.grid.width = g.at("width").get<double>();
        sf.grid.height = g.at("height").get<double>();
        if (g.contains("center")) sf.grid.center = point_from_json(g["center"], "grid center");
        if (sf.grid.nx < 2 || sf.grid.ny < 2 || sf.grid.width <= 0.0 || sf.grid.height <= 0.0)
            throw MalformedHeader("scene: grid needs nx, ny >= 2 and positive extent");
        sf.has_grid = true;
    }

    if (doc.contains("time")) {
        const Json& t = doc["time"];
        sf.time_axis.num_bins = t.at("bins").get<int>();
        sf.time_axis.bin_width = t.at("bin_width").get<double>();
        if (sf.time_axis.num_bins < 2 || sf.time_axis.bin_width <= 0.0)
            throw MalformedHeader("scene: time needs bins >= 2 and bin_width > 0");
    }
    return sf;
}

SceneFile load_scene(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("scene: cannot open '" + path + "'");
    Json doc = Json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw MalformedHeader("scene: '" + path + "' is not valid JSON");
    return parse_scene(doc);
}

}  // namespace c2nlos
