#include <CLI11.hpp>
#include <fftw3.h>
#include <png.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "c2nlos/errors.hpp"
#include "c2nlos/io.hpp"
#include "c2nlos/metrics.hpp"
#include "c2nlos/parallel.hpp"
#include "c2nlos/radon2d.hpp"
#include "c2nlos/recon3d.hpp"

namespace c2nlos {

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct GlobalOpts {
    std::uint64_t seed = 1234;
    int threads = 1;
    std::string config_path;
    std::string manifest_path;  // empty: derive from the primary output
    Json config = Json::object();
    std::vector<std::string> argv;
};

Json versions_json() {
    return Json{{"c2nlos", kToolVersion},
                {"fftw", std::string(fftw_version)},
                {"libpng", PNG_LIBPNG_VER_STRING},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"cli11", CLI11_VERSION}};
}

// every run leaves a manifest next to its primary output: what ran, with
// which effective parameters, on what, producing what, how long
void write_manifest(const GlobalOpts& g, const std::string& command, const Json& params,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double total_ms) {
    std::string path = g.manifest_path;
    if (path.empty())
        path = (outputs.empty() ? command : outputs.front()) + ".manifest.json";
    Json m{{"command", command},
           {"argv", g.argv},
           {"seed", g.seed},
           {"threads", g.threads},
           {"rng", Json{{"generator", "mt19937_64"}, {"seed", g.seed}}},
           {"parameters", params},
           {"inputs", inputs},
           {"outputs", outputs},
           {"versions", versions_json()},
           {"timings_ms", Json{{"total", total_ms}}}};
    std::ofstream f(path);
    if (!f) throw Error("manifest: cannot write '" + path + "'");
    f << m.dump(2) << '\n';
}

// --config JSON supplies defaults per subcommand; explicit flags win
template <typename T>
void pull(const Json& cfg, const CLI::App* sub, const std::string& flag, const char* key,
          T& var) {
    if (sub->count(flag) == 0 && cfg.contains(key)) var = cfg.at(key).get<T>();
}

TransientSinogram load_sinogram(const std::string& path) {
    return sinogram_from_tensor(read_tensor(path));
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// ------------------------------------------------------------------
// simulate: scene JSON -> transient tensor (circle scan or grid scan)
// ------------------------------------------------------------------
struct SimulateOpts {
    std::string scene, out;
    int resample_v = 0;
    double noise_scale = 0.0;
    double dark_rate = 0.0;
};

int run_simulate(const GlobalOpts& g, const CLI::App* sub, SimulateOpts& o) {
    Json cfg = g.config.value("simulate", Json::object());
    pull(cfg, sub, "--resample-v", "resample_v", o.resample_v);
    pull(cfg, sub, "--noise-scale", "noise_scale", o.noise_scale);
    pull(cfg, sub, "--dark-rate", "dark_rate", o.dark_rate);

    auto t0 = std::chrono::steady_clock::now();
    SceneFile sf = load_scene(o.scene);
    validate_scene(sf.scene);
    Json params{{"resample_v", o.resample_v},
                {"noise_scale", o.noise_scale},
                {"dark_rate", o.dark_rate},
                {"scan", sf.has_circle ? "circle" : "grid"}};
    if (sf.has_circle) {
        TransientSinogram sino = simulate_sinogram(sf.scene, sf.circle, sf.time_axis);
        if (o.noise_scale > 0.0)
            sino = add_poisson_noise(sino, o.noise_scale, o.dark_rate, g.seed);
        if (o.resample_v > 0) sino = resample_to_v(sino, o.resample_v);
        write_tensor(to_tensor(sino), o.out);
    } else {
        ConfocalTransient ct = simulate_confocal(sf.scene, sf.grid, sf.time_axis);
        if (o.noise_scale > 0.0) ct = add_poisson_noise(ct, o.noise_scale, o.dark_rate, g.seed);
        if (o.resample_v > 0) ct = resample_to_v(ct, o.resample_v);
        write_tensor(to_tensor(ct), o.out);
    }
    write_manifest(g, "simulate", params, {o.scene}, {o.out}, elapsed_ms(t0));
    std::cout << Json{{"out", o.out}}.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------
// localize: sinogram tensor -> scatterer detections (CSV)
// ------------------------------------------------------------------
struct LocalizeOpts {
    std::string in, out;
    int num = 1;
    int num_v = 512;
    int num_amplitudes = 0;
};

int run_localize(const GlobalOpts& g, const CLI::App* sub, LocalizeOpts& o) {
    Json cfg = g.config.value("localize", Json::object());
    pull(cfg, sub, "--num", "num", o.num);
    pull(cfg, sub, "--num-v", "num_v", o.num_v);
    pull(cfg, sub, "--amplitudes", "amplitudes", o.num_amplitudes);

    auto t0 = std::chrono::steady_clock::now();
    TransientSinogram sino = load_sinogram(o.in);
    LocalizeConfig lc;
    lc.num_v = o.num_v;
    lc.num_amplitudes = o.num_amplitudes;
    std::vector<Detection> dets = localize(sino, o.num, lc);
    write_detections_csv(dets, o.out);

    Json out_json = Json::array();
    for (const Detection& d : dets)
        out_json.push_back(Json{{"x", d.position.x},
                                {"y", d.position.y},
                                {"z", d.position.z},
                                {"score", d.score}});
    Json params{{"num", o.num}, {"num_v", o.num_v}, {"amplitudes", o.num_amplitudes}};
    write_manifest(g, "localize", params, {o.in}, {o.out}, elapsed_ms(t0));
    std::cout << Json{{"detections", out_json}}.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------
// radon2d: sinogram tensor -> focused backprojection image
// ------------------------------------------------------------------
struct Radon2dOpts {
    std::string in, out, png;
    double focus = 0.0;  // 0: intensity-weighted auto focus
    std::string filter = "ramlak";
    int size = 360;
    double undistort_strength = 0.0;
};

int run_radon2d(const GlobalOpts& g, const CLI::App* sub, Radon2dOpts& o) {
    Json cfg = g.config.value("radon2d", Json::object());
    pull(cfg, sub, "--focus", "focus", o.focus);
    pull(cfg, sub, "--filter", "filter", o.filter);
    pull(cfg, sub, "--size", "size", o.size);
    pull(cfg, sub, "--undistort-strength", "undistort_strength", o.undistort_strength);
    if (o.filter != "ramlak" && o.filter != "none")
        throw Error("radon2d: filter must be ramlak or none");

    auto t0 = std::chrono::steady_clock::now();
    TransientSinogram sino = load_sinogram(o.in);
    if (sino.axis_kind == AxisKind::Time) sino = resample_to_v(sino);
    double r_est = o.focus > 0.0 ? o.focus : auto_focus(sino);
    CroppedSinogram cs = crop_sinogram(sino, r_est, sino.circle);
    FilterKind fk = o.filter == "ramlak" ? FilterKind::RamLak : FilterKind::None;
    PlaneImage img = inverse_radon(cs, fk, o.size);
    if (o.undistort_strength != 0.0) img = undistort(img, o.undistort_strength);

    write_tensor(to_tensor(img.data, img.extent, img.pixel_pitch), o.out);
    std::vector<std::string> outputs{o.out};
    if (!o.png.empty()) {
        emit_png(img.data, Normalization{}, o.png);
        outputs.push_back(o.png);
    }
    Json params{{"focus", r_est},
                {"filter", o.filter},
                {"size", o.size},
                {"undistort_strength", o.undistort_strength}};
    write_manifest(g, "radon2d", params, {o.in}, outputs, elapsed_ms(t0));
    std::cout << Json{{"focus", r_est}, {"extent", img.extent}}.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------------
// invert2d: sinogram tensor -> regularized plane albedo solve
// ------------------------------------------------------------------
struct Invert2dOpts {
    std::string in, out, png;
    double depth = 0.0;
    int resolution = 64;
    double plane_width = 2.0;
    int num_v = 512;
    double lambda = 1e-6;
    double budget_mb = 1024.0;
    int max_iterations = 2000;
    double tolerance = 1e-6;
};

int run_invert2d(const GlobalOpts& g, const CLI::App* sub, Invert2dOpts& o) {
    Json cfg = g.config.value("invert2d", Json::object());
    pull(cfg, sub, "--depth", "depth", o.depth);
    pull(cfg, sub, "--resolution", "resolution", o.resolution);
    pull(cfg, sub, "--plane-width", "plane_width", o.plane_width);
    pull(cfg, sub, "--num-v", "num_v", o.num_v);
    pull(cfg, sub, "--lambda", "lambda", o.lambda);
    pull(cfg, sub, "--budget-mb", "budget_mb", o.budget_mb);
    pull(cfg, sub, "--max-iterations", "max_iterations", o.max_iterations);
    pull(cfg, sub, "--tolerance", "tolerance", o.tolerance);

    auto t0 = std::chrono::steady_clock::now();
    TransientSinogram sino = load_sinogram(o.in);
    if (sino.axis_kind == AxisKind::Time)
        sino = resample_to_v(sino, o.num_v);
    else
        o.num_v = sino.bins();
    PlaneSystem sys = build_plane_matrix(
        o.depth, sino.circle, o.resolution, o.plane_width, sino.time_axis, o.num_v, o.lambda,
        static_cast<std::size_t>(o.budget_mb * 1024.0 * 1024.0));
    PlaneSolveResult res = solve_plane(sino, sys, o.max_iterations, o.tolerance);

    write_tensor(to_tensor(res.image.data, res.image.extent, res.image.pixel_pitch), o.out);
    std::vector<std::string> outputs{o.out};
    if (!o.png.empty()) {
        emit_png(res.image.data, Normalization{}, o.png);
        outputs.push_back(o.png);
    }
    Json params{{"depth", o.depth},           {"resolution", o.resolution},
                {"plane_width", o.plane_width}, {"num_v", o.num_v},
                {"lambda", o.lambda},         {"max_iterations", o.max_iterations},
                {"tolerance", o.tolerance}};
    write_manifest(g, "invert2d", params, {o.in}, outputs, elapsed_ms(t0));
    std::cout << Json{{"converged", res.converged},
                      {"iterations", res.iterations},
                      {"residual", res.relative_residual}}
                     .dump()
              << "\n";
    return 0;
}

// ------------------------------------------------------------------
// recon3d: circle-sampled sinogram (or full grid scan) -> voxel volume
// ------------------------------------------------------------------
struct Recon3dOpts {
    std::string in, out;
    std::string mip_front, mip_top, mip_side;
    int nx = 64, ny = 64;
    double width = 2.0, height = 2.0;
    int num_v = 0;  // 0: keep the input bin count (input must be v-axis)
    double mu = 1.0, nu = 0.0;
    double lambda_s = 1e-2, lambda_tv = 1e-2;
    bool no_nonneg = false, no_unresample = false;
    int iterations = 200, power_iterations = 20;
    double tolerance = 1e-4;
    int out_slices = 0;
    double z_min = 0.0, z_max = 0.0;
};

Array2D<float> mip(const Array3D<float>& cube, int axis) {
    int n0 = cube.n0, n1 = cube.n1, n2 = cube.n2;
    int rows = axis == 0 ? n1 : n0;
    int cols = axis == 2 ? n1 : n2;
    Array2D<float> img(rows, cols);
    for (float& x : img.v) x = -1e30f;
    for (int k = 0; k < n0; ++k)
        for (int j = 0; j < n1; ++j)
            for (int i = 0; i < n2; ++i) {
                float v = cube(k, j, i);
                float& dst = axis == 0 ? img(j, i) : (axis == 1 ? img(k, i) : img(k, j));
                if (v > dst) dst = v;
            }
    return img;
}

int run_recon3d(const GlobalOpts& g, const CLI::App* sub, Recon3dOpts& o) {
    Json cfg = g.config.value("recon3d", Json::object());
    pull(cfg, sub, "--nx", "nx", o.nx);
    pull(cfg, sub, "--ny", "ny", o.ny);
    pull(cfg, sub, "--width", "width", o.width);
    pull(cfg, sub, "--height", "height", o.height);
    pull(cfg, sub, "--num-v", "num_v", o.num_v);
    pull(cfg, sub, "--mu", "mu", o.mu);
    pull(cfg, sub, "--nu", "nu", o.nu);
    pull(cfg, sub, "--lambda-s", "lambda_s", o.lambda_s);
    pull(cfg, sub, "--lambda-tv", "lambda_tv", o.lambda_tv);
    pull(cfg, sub, "--iterations", "iterations", o.iterations);
    pull(cfg, sub, "--tolerance", "tolerance", o.tolerance);
    pull(cfg, sub, "--out-slices", "out_slices", o.out_slices);
    pull(cfg, sub, "--z-min", "z_min", o.z_min);
    pull(cfg, sub, "--z-max", "z_max", o.z_max);

    auto t0 = std::chrono::steady_clock::now();
    TensorFile tf = read_tensor(o.in);

    TransientSinogram sino;
    GridSpec grid;
    SamplingMask mask;
    if (tf.dims.size() == 2) {
        // circle-sampled measurement over a chosen lateral grid
        sino = sinogram_from_tensor(tf);
        grid = GridSpec{o.nx, o.ny, o.width, o.height, sino.circle.center};
        mask = circle_mask(grid, sino.circle);
    } else {
        // full grid scan: one mask row per wall pixel
        ConfocalTransient ct = confocal_from_tensor(tf);
        grid = ct.grid;
        mask = identity_mask(grid);
        sino.circle = ScanCircle{1.0, grid.center, grid.nx * grid.ny};
        sino.time_axis = ct.time_axis;
        sino.axis_kind = ct.axis_kind;
        sino.v_max = ct.v_max;
        sino.data = Array2D<float>(grid.nx * grid.ny, ct.data.n2);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                for (int b = 0; b < ct.data.n2; ++b)
                    sino.data(j * grid.nx + i, b) = ct.data(j, i, b);
    }
    if (sino.axis_kind == AxisKind::Time) {
        if (o.num_v <= 0) throw Error("recon3d: time-axis input needs --num-v");
        sino = resample_to_v(sino, o.num_v);
    }

    LctOperator op = build_lct_operator(grid, sino.bins(), sino.v_max);
    AdmmParams params;
    params.mu = o.mu;
    params.nu = o.nu;
    params.lambda_s = o.lambda_s;
    params.lambda_tv = o.lambda_tv;
    params.nonneg = !o.no_nonneg;
    params.max_iterations = o.iterations;
    params.tolerance = o.tolerance;
    params.power_iterations = o.power_iterations;
    params.seed = g.seed;
    params.out_slices = o.out_slices;
    params.z_min = o.z_min;
    params.z_max = o.z_max;
    params.unresample = !o.no_unresample;

    AdmmReport report;
    VoxelVolume vol = admm_reconstruct(sino, op, mask, params, &report);

    TensorFile out;
    out.dims = {vol.data.n0, vol.data.n1, vol.data.n2};
    out.axis_names = {"z", "y", "x"};
    out.axis_units = {vol.lct_resampled ? "m^2" : "m", "m", "m"};
    out.geometry = Json{{"grid",
                         Json{{"nx", grid.nx},
                              {"ny", grid.ny},
                              {"width", grid.width},
                              {"height", grid.height},
                              {"center", Json::array({grid.center.x, grid.center.y,
                                                      grid.center.z})}}},
                        {"lct_resampled", vol.lct_resampled},
                        {"v_extent", vol.v_extent},
                        {"z_min", vol.z_min},
                        {"z_max", vol.z_max}};
    out.data = vol.data.v;
    write_tensor(out, o.out);

    std::vector<std::string> outputs{o.out};
    struct {
        const std::string* path;
        int axis;
    } mips[] = {{&o.mip_front, 0}, {&o.mip_top, 1}, {&o.mip_side, 2}};
    for (const auto& m : mips)
        if (!m.path->empty()) {
            emit_png(mip(vol.data, m.axis), Normalization{}, *m.path);
            outputs.push_back(*m.path);
        }

    Json jparams{{"nx", grid.nx},
                 {"ny", grid.ny},
                 {"num_v", sino.bins()},
                 {"mu", o.mu},
                 {"nu", report.nu},
                 {"lambda_s", report.lambda_s},
                 {"lambda_tv", report.lambda_tv},
                 {"nonneg", params.nonneg},
                 {"iterations", o.iterations},
                 {"tolerance", o.tolerance}};
    write_manifest(g, "recon3d", jparams, {o.in}, outputs, elapsed_ms(t0));
    std::cout << Json{{"iterations", report.iterations},
                      {"converged", report.converged},
                      {"data_residual", report.data_residual},
                      {"objective",
                       report.objective.empty() ? 0.0 : report.objective.back()}}
                     .dump()
              << "\n";
    return 0;
}

// ------------------------------------------------------------------
// trilaterate: three sinogram rows -> one scatterer position
// ------------------------------------------------------------------
struct TrilaterateOpts {
    std::string in, out;
    std::vector<int> rows;
};

int run_trilaterate(const GlobalOpts& g, const CLI::App* sub, TrilaterateOpts& o) {
    Json cfg = g.config.value("trilaterate", Json::object());
    pull(cfg, sub, "--rows", "rows", o.rows);

    auto t0 = std::chrono::steady_clock::now();
    TransientSinogram sino = load_sinogram(o.in);
    int na = sino.num_angles();
    if (o.rows.empty()) o.rows = {0, na / 3, 2 * na / 3};
    if (o.rows.size() != 3) throw Error("trilaterate: exactly three rows required");

    std::array<double, 3> times{};
    std::array<CartesianPoint, 3> points{};
    for (int q = 0; q < 3; ++q) {
        int row = o.rows[static_cast<std::size_t>(q)];
        if (row < 0 || row >= na) throw Error("trilaterate: row out of range");
        int best = 0;
        for (int b = 1; b < sino.bins(); ++b)
            if (sino.data(row, b) > sino.data(row, best)) best = b;
        if (sino.axis_kind == AxisKind::V)
            times[q] = 2.0 * std::sqrt(sino.v_of_bin(best)) / kSpeedOfLight;
        else
            times[q] = sino.time_axis.time_of_bin(best);
        points[q] = sino.circle.point(row);
    }
    TrilaterationResult res = trilaterate(times, points);

    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw Error("trilaterate: cannot write '" + o.out + "'");
        f << "x,y,z,residual\n";
        f << res.position.x << ',' << res.position.y << ',' << res.position.z << ','
          << res.residual << "\n";
        outputs.push_back(o.out);
    }
    Json params{{"rows", o.rows}};
    write_manifest(g, "trilaterate", params, {o.in}, outputs, elapsed_ms(t0));
    std::cout << Json{{"x", res.position.x},
                      {"y", res.position.y},
                      {"z", res.position.z},
                      {"residual", res.residual},
                      {"exact", res.exact}}
                     .dump()
              << "\n";
    return 0;
}

// ------------------------------------------------------------------
// metrics: compare two 2D tensors
// ------------------------------------------------------------------
struct MetricsOpts {
    std::string a, b, out;
    int window = 8;
};

int run_metrics(const GlobalOpts& g, const CLI::App* sub, MetricsOpts& o) {
    Json cfg = g.config.value("metrics", Json::object());
    pull(cfg, sub, "--window", "window", o.window);

    auto t0 = std::chrono::steady_clock::now();
    TensorFile ta = read_tensor(o.a);
    TensorFile tb = read_tensor(o.b);
    if (ta.dims.size() != 2 || tb.dims.size() != 2)
        throw Error("metrics: both tensors must be 2D");
    if (ta.dims != tb.dims) throw SizeMismatch("metrics: tensor dims differ");
    Array2D<float> ia(ta.dims[0], ta.dims[1]), ib(tb.dims[0], tb.dims[1]);
    ia.v = ta.data;
    ib.v = tb.data;

    Json result{{"mse", mse(ia, ib)},
                {"psnr", psnr(ia, ib)},
                {"ssim", ssim(ia, ib, o.window)}};
    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        std::ofstream f(o.out);
        if (!f) throw Error("metrics: cannot write '" + o.out + "'");
        f << result.dump(2) << '\n';
        outputs.push_back(o.out);
    }
    write_manifest(g, "metrics", Json{{"window", o.window}}, {o.a, o.b}, outputs,
                   elapsed_ms(t0));
    std::cout << result.dump() << "\n";
    return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
    CLI::App app{"circular-scan transient simulation and reconstruction toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    g.argv.assign(argv, argv + argc);
    app.add_option("--seed", g.seed, "seed for every stochastic step");
    app.add_option("--threads", g.threads, "worker threads (0: hardware count)");
    app.add_option("--config", g.config_path, "JSON file with per-subcommand defaults");
    app.add_option("--manifest", g.manifest_path, "manifest path override");

    SimulateOpts sim;
    CLI::App* c_sim = app.add_subcommand("simulate", "render a scene to a transient tensor");
    c_sim->add_option("--scene", sim.scene, "scene JSON")->required();
    c_sim->add_option("--out", sim.out, "output tensor")->required();
    c_sim->add_option("--resample-v", sim.resample_v,
                      "resample onto this many squared-range bins (0: keep time)");
    c_sim->add_option("--noise-scale", sim.noise_scale,
                      "photons per unit intensity for shot noise (0: noiseless)");
    c_sim->add_option("--dark-rate", sim.dark_rate, "dark counts per bin");

    LocalizeOpts loc;
    CLI::App* c_loc = app.add_subcommand("localize", "find scatterers in a sinogram");
    c_loc->add_option("--in", loc.in, "sinogram tensor")->required();
    c_loc->add_option("--out", loc.out, "detections CSV")->required();
    c_loc->add_option("--num", loc.num, "number of scatterers to extract");
    c_loc->add_option("--num-v", loc.num_v, "squared-range bins used for voting");
    c_loc->add_option("--amplitudes", loc.num_amplitudes, "amplitude bins (0: num-v/2)");

    Radon2dOpts rad;
    CLI::App* c_rad = app.add_subcommand("radon2d", "focused tomographic backprojection");
    c_rad->add_option("--in", rad.in, "sinogram tensor")->required();
    c_rad->add_option("--out", rad.out, "image tensor")->required();
    c_rad->add_option("--png", rad.png, "grayscale preview PNG");
    c_rad->add_option("--focus", rad.focus, "focus radius in meters (0: auto)");
    c_rad->add_option("--filter", rad.filter, "ramlak | none");
    c_rad->add_option("--size", rad.size, "output image size in pixels");
    c_rad->add_option("--undistort-strength", rad.undistort_strength,
                      "radial correction strength (0: off)");

    Invert2dOpts inv;
    CLI::App* c_inv = app.add_subcommand("invert2d", "regularized plane inversion");
    c_inv->add_option("--in", inv.in, "sinogram tensor")->required();
    c_inv->add_option("--out", inv.out, "image tensor")->required();
    c_inv->add_option("--png", inv.png, "grayscale preview PNG");
    c_inv->add_option("--depth", inv.depth, "hidden plane depth in meters")->required();
    c_inv->add_option("--resolution", inv.resolution, "plane pixels per side");
    c_inv->add_option("--plane-width", inv.plane_width, "plane extent in meters");
    c_inv->add_option("--num-v", inv.num_v, "squared-range bins");
    c_inv->add_option("--lambda", inv.lambda, "ridge weight");
    c_inv->add_option("--budget-mb", inv.budget_mb, "matrix memory budget");
    c_inv->add_option("--max-iterations", inv.max_iterations, "CG iteration cap");
    c_inv->add_option("--tolerance", inv.tolerance, "CG relative residual target");

    Recon3dOpts rec;
    CLI::App* c_rec = app.add_subcommand("recon3d", "iterative 3D volume reconstruction");
    c_rec->add_option("--in", rec.in, "sinogram or grid-scan tensor")->required();
    c_rec->add_option("--out", rec.out, "volume tensor")->required();
    c_rec->add_option("--mip-front", rec.mip_front, "front (x-y) projection PNG");
    c_rec->add_option("--mip-top", rec.mip_top, "top (x-z) projection PNG");
    c_rec->add_option("--mip-side", rec.mip_side, "side (y-z) projection PNG");
    c_rec->add_option("--nx", rec.nx, "volume pixels across (power of two)");
    c_rec->add_option("--ny", rec.ny, "volume pixels down (power of two)");
    c_rec->add_option("--width", rec.width, "lateral extent in meters");
    c_rec->add_option("--height", rec.height, "vertical extent in meters");
    c_rec->add_option("--num-v", rec.num_v, "squared-range bins for time-axis input");
    c_rec->add_option("--mu", rec.mu, "quadratic penalty weight");
    c_rec->add_option("--nu", rec.nu, "linearization weight (0: auto from power iteration)");
    c_rec->add_option("--lambda-s", rec.lambda_s, "sparsity weight, relative");
    c_rec->add_option("--lambda-tv", rec.lambda_tv, "total-variation weight, relative");
    c_rec->add_flag("--no-nonneg", rec.no_nonneg, "drop the nonnegativity constraint");
    c_rec->add_option("--iterations", rec.iterations, "solver iterations");
    c_rec->add_option("--tolerance", rec.tolerance, "primal residual stop");
    c_rec->add_option("--power-iterations", rec.power_iterations,
                      "steps for the operator norm estimate");
    c_rec->add_option("--out-slices", rec.out_slices, "depth slices in the output (0: nx)");
    c_rec->add_option("--z-min", rec.z_min, "near depth of the output in meters");
    c_rec->add_option("--z-max", rec.z_max, "far depth of the output in meters");
    c_rec->add_flag("--no-unresample", rec.no_unresample,
                    "keep the solver's squared-range slicing");

    TrilaterateOpts tri;
    CLI::App* c_tri = app.add_subcommand("trilaterate", "position from three scan angles");
    c_tri->add_option("--in", tri.in, "sinogram tensor")->required();
    c_tri->add_option("--out", tri.out, "result CSV");
    c_tri->add_option("--rows", tri.rows, "three angle rows (default: spread thirds)")
        ->expected(0, 3);

    MetricsOpts met;
    CLI::App* c_met = app.add_subcommand("metrics", "compare two image tensors");
    c_met->add_option("--a", met.a, "first tensor")->required();
    c_met->add_option("--b", met.b, "reference tensor")->required();
    c_met->add_option("--out", met.out, "metrics JSON file");
    c_met->add_option("--window", met.window, "local similarity window");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    }

    try {
        if (!g.config_path.empty()) {
            std::ifstream f(g.config_path);
            if (!f) throw Error("config: cannot open '" + g.config_path + "'");
            g.config = Json::parse(f, nullptr, false);
            if (g.config.is_discarded())
                throw MalformedHeader("config: '" + g.config_path + "' is not valid JSON");
        }
        set_default_threads(g.threads);
        if (c_sim->parsed()) return run_simulate(g, c_sim, sim);
        if (c_loc->parsed()) return run_localize(g, c_loc, loc);
        if (c_rad->parsed()) return run_radon2d(g, c_rad, rad);
        if (c_inv->parsed()) return run_invert2d(g, c_inv, inv);
        if (c_rec->parsed()) return run_recon3d(g, c_rec, rec);
        if (c_tri->parsed()) return run_trilaterate(g, c_tri, tri);
        if (c_met->parsed()) return run_metrics(g, c_met, met);
        std::cerr << "error: no subcommand selected\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace c2nlos
