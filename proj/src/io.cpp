#include "pitof/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "pitof/errors.hpp"

namespace pitof {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr char kMagic[4] = {'P', 'I', 'T', 'F'};
constexpr std::uint16_t kFormatVersion = 1;

enum PlaneKind : std::uint8_t {
    kParallel = 0,
    kCross = 1,
    kAmbientParallel = 2,
    kAmbientCross = 3,
};
constexpr std::uint8_t kTapNone = 255;

struct PlaneDesc {
    std::uint8_t polarization;
    std::uint8_t tap; // 0..3 for the tap labels 0/45/90/135, 255 for ambient
};

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path + ": " + ec.message());
}

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& off) {
    if (off + sizeof(T) > in.size()) throw IoError("truncated container");
    T value;
    std::memcpy(&value, in.data() + off, sizeof(T));
    off += sizeof(T);
    return value;
}

void append_plane(std::string& out, const Plane<TapSet>& taps, int tap_index) {
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const TapSet& t = taps[i];
        const double v = tap_index == 0   ? t.i0
                         : tap_index == 1 ? t.i45
                         : tap_index == 2 ? t.i90
                                          : t.i135;
        put(out, static_cast<float>(v));
    }
}

void check_keys(const json& j, const std::set<std::string>& allowed, bool strict,
                const std::string& where) {
    if (!strict) return;
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + where + " (strict mode)");
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

void write_capture(const std::string& path, const CaptureStack& stack) {
    stack.validate();
    std::vector<PlaneDesc> descs;
    for (std::uint8_t t = 0; t < 4; ++t) descs.push_back({kParallel, t});
    for (std::uint8_t t = 0; t < 4; ++t) descs.push_back({kCross, t});
    if (stack.ambient_parallel) descs.push_back({kAmbientParallel, kTapNone});
    if (stack.ambient_cross) descs.push_back({kAmbientCross, kTapNone});

    std::string out;
    out.reserve(20 + descs.size() * (2 + 4ull * stack.width * stack.height));
    out.append(kMagic, 4);
    put(out, kFormatVersion);
    put(out, static_cast<std::uint32_t>(stack.width));
    put(out, static_cast<std::uint32_t>(stack.height));
    put(out, static_cast<std::uint16_t>(descs.size()));
    for (const PlaneDesc& d : descs) {
        put(out, d.polarization);
        put(out, d.tap);
    }
    for (int t = 0; t < 4; ++t) append_plane(out, stack.parallel, t);
    for (int t = 0; t < 4; ++t) append_plane(out, stack.cross, t);
    for (const auto& amb : {stack.ambient_parallel, stack.ambient_cross}) {
        if (!amb) continue;
        for (std::size_t i = 0; i < amb->size(); ++i)
            put(out, static_cast<float>((*amb)[i]));
    }
    atomic_write(path, out);
}

CaptureStack read_capture(const std::string& path) {
    const std::string bytes = read_all(path);
    std::size_t off = 0;
    char magic[4];
    if (bytes.size() < 4) throw IoError("not a PITF file: " + path);
    std::memcpy(magic, bytes.data(), 4);
    off = 4;
    if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad magic in " + path);
    const auto version = take<std::uint16_t>(bytes, off);
    if (version != kFormatVersion)
        throw IoError("unsupported PITF version " + std::to_string(version));
    const auto width = take<std::uint32_t>(bytes, off);
    const auto height = take<std::uint32_t>(bytes, off);
    const auto plane_count = take<std::uint16_t>(bytes, off);
    if (width == 0 || height == 0) throw IoError("empty dimensions in " + path);

    std::vector<PlaneDesc> descs(plane_count);
    for (auto& d : descs) {
        d.polarization = take<std::uint8_t>(bytes, off);
        d.tap = take<std::uint8_t>(bytes, off);
    }
    const std::size_t plane_bytes = 4ull * width * height;
    if (bytes.size() != off + plane_bytes * plane_count)
        throw IoError("file size does not match header of " + path);

    CaptureStack stack;
    stack.width = static_cast<int>(width);
    stack.height = static_cast<int>(height);
    stack.parallel = Plane<TapSet>(stack.width, stack.height);
    stack.cross = Plane<TapSet>(stack.width, stack.height);

    bool seen[2][4] = {};
    for (const PlaneDesc& d : descs) {
        std::vector<float> data(width * static_cast<std::size_t>(height));
        std::memcpy(data.data(), bytes.data() + off, plane_bytes);
        off += plane_bytes;
        if (d.polarization == kParallel || d.polarization == kCross) {
            if (d.tap > 3) throw IoError("bad tap label in " + path);
            Plane<TapSet>& target = d.polarization == kParallel ? stack.parallel : stack.cross;
            seen[d.polarization][d.tap] = true;
            for (std::size_t i = 0; i < target.size(); ++i) {
                TapSet& t = target[i];
                (d.tap == 0   ? t.i0
                 : d.tap == 1 ? t.i45
                 : d.tap == 2 ? t.i90
                              : t.i135) = data[i];
            }
        } else if (d.polarization == kAmbientParallel || d.polarization == kAmbientCross) {
            Plane<double> amb(stack.width, stack.height);
            for (std::size_t i = 0; i < amb.size(); ++i) amb[i] = data[i];
            (d.polarization == kAmbientParallel ? stack.ambient_parallel
                                                : stack.ambient_cross) = std::move(amb);
        } else {
            throw IoError("unknown plane descriptor in " + path);
        }
    }
    for (int pol = 0; pol < 2; ++pol)
        for (int tap = 0; tap < 4; ++tap)
            if (!seen[pol][tap]) throw IoError("incomplete tap planes in " + path);
    return stack;
}

void write_plane_f32(const std::string& path, const Plane<double>& plane) {
    std::string out;
    out.reserve(plane.size() * 4);
    for (std::size_t i = 0; i < plane.size(); ++i) put(out, static_cast<float>(plane[i]));
    atomic_write(path, out);
}

Plane<double> read_plane_f32(const std::string& path, int width, int height) {
    const std::string bytes = read_all(path);
    const std::size_t expect = 4ull * width * height;
    if (bytes.size() != expect)
        throw IoError("plane file size mismatch: " + path + " (expected " +
                      std::to_string(expect) + " bytes, found " +
                      std::to_string(bytes.size()) + ")");
    Plane<double> plane(width, height);
    for (std::size_t i = 0; i < plane.size(); ++i) {
        float v;
        std::memcpy(&v, bytes.data() + 4 * i, 4);
        plane[i] = v;
    }
    return plane;
}

void write_plane_manifest(const std::string& path, int width, int height,
                          const std::string& quantity) {
    json j;
    j["format"] = "pitof-plane";
    j["version"] = 1;
    j["width"] = width;
    j["height"] = height;
    j["quantity"] = quantity;
    atomic_write(path, j.dump(2) + "\n");
}

PlaneMeta read_plane_manifest(const std::string& path, bool strict) {
    json j = json::parse(read_all(path));
    check_keys(j, {"format", "version", "width", "height", "quantity"}, strict, "plane manifest");
    if (j.value("format", "") != "pitof-plane")
        throw ConfigError("not a plane manifest: " + path);
    PlaneMeta meta;
    meta.width = j.at("width").get<int>();
    meta.height = j.at("height").get<int>();
    meta.quantity = j.value("quantity", "");
    if (meta.width <= 0 || meta.height <= 0)
        throw ConfigError("bad dimensions in " + path);
    return meta;
}

void write_manifest(const std::string& path, const SimManifest& manifest) {
    json cam;
    cam["mod_freq"] = manifest.camera.mod_freq;
    cam["k0"] = manifest.camera.k0;
    cam["phi0"] = manifest.camera.phi0;
    cam["width"] = manifest.camera.width;
    cam["height"] = manifest.camera.height;

    json j;
    j["format"] = "pitof-manifest";
    j["version"] = 1;
    j["camera"] = cam;
    if (manifest.fog) {
        j["fog"] = {{"sigma_i", manifest.fog->sigma_i()},
                    {"sigma_p", manifest.fog->sigma_p()},
                    {"phi0", manifest.fog->phi0()}};
        j["alpha"] = manifest.alpha;
    } else {
        j["fog"] = nullptr;
    }
    j["noise"] = {{"mode", manifest.noise.mode == NoiseMode::none       ? "none"
                           : manifest.noise.mode == NoiseMode::gaussian ? "gaussian"
                                                                        : "shot"},
                  {"scale", manifest.noise.scale},
                  {"seed", manifest.noise.seed}};
    j["sim"] = {{"integration",
                 manifest.integration == IntegrationMode::infinite ? "infinite" : "truncated"},
                {"backscatter_phase",
                 manifest.phase_model == BackscatterPhase::analytic ? "analytic" : "integrated"},
                {"polarized_target_fraction", manifest.polarized_target_fraction}};
    j["provenance"] = {{"seed", manifest.noise.seed}, {"tool_version", manifest.tool_version}};
    atomic_write(path, j.dump(2) + "\n");
}

SimManifest read_manifest(const std::string& path, bool strict) {
    json j = json::parse(read_all(path));
    check_keys(j, {"format", "version", "camera", "fog", "alpha", "noise", "sim", "provenance"},
               strict, "manifest");
    if (j.value("format", "") != "pitof-manifest")
        throw ConfigError("not a capture manifest: " + path);

    SimManifest m;
    const json& cam = j.at("camera");
    check_keys(cam, {"mod_freq", "k0", "phi0", "width", "height"}, strict, "manifest.camera");
    m.camera.mod_freq = cam.at("mod_freq").get<double>();
    m.camera.k0 = cam.at("k0").get<double>();
    m.camera.phi0 = cam.at("phi0").get<double>();
    m.camera.width = cam.at("width").get<int>();
    m.camera.height = cam.at("height").get<int>();

    if (j.contains("fog") && !j.at("fog").is_null()) {
        const json& fog = j.at("fog");
        check_keys(fog, {"sigma_i", "sigma_p", "phi0"}, strict, "manifest.fog");
        m.fog = FogParams(fog.at("sigma_i").get<double>(), fog.at("sigma_p").get<double>(),
                          fog.at("phi0").get<double>());
        m.alpha = j.value("alpha", m.fog->alpha());
    }

    if (j.contains("noise")) {
        const json& noise = j.at("noise");
        check_keys(noise, {"mode", "scale", "seed"}, strict, "manifest.noise");
        const std::string mode = noise.value("mode", "none");
        if (mode == "none")
            m.noise.mode = NoiseMode::none;
        else if (mode == "gaussian")
            m.noise.mode = NoiseMode::gaussian;
        else if (mode == "shot")
            m.noise.mode = NoiseMode::shot;
        else
            throw ConfigError("unknown noise mode: " + mode);
        m.noise.scale = noise.value("scale", 0.0);
        m.noise.seed = noise.value("seed", std::uint64_t{0});
    }

    if (j.contains("sim")) {
        const json& sim = j.at("sim");
        check_keys(sim, {"integration", "backscatter_phase", "polarized_target_fraction"},
                   strict, "manifest.sim");
        const std::string integ = sim.value("integration", "infinite");
        if (integ == "infinite")
            m.integration = IntegrationMode::infinite;
        else if (integ == "truncated")
            m.integration = IntegrationMode::truncated;
        else
            throw ConfigError("unknown integration mode: " + integ);
        const std::string ph = sim.value("backscatter_phase", "analytic");
        if (ph == "analytic")
            m.phase_model = BackscatterPhase::analytic;
        else if (ph == "integrated")
            m.phase_model = BackscatterPhase::integrated;
        else
            throw ConfigError("unknown backscatter phase model: " + ph);
        m.polarized_target_fraction = sim.value("polarized_target_fraction", 0.0);
    }

    if (j.contains("provenance")) {
        check_keys(j.at("provenance"), {"seed", "tool_version"}, strict, "manifest.provenance");
        m.tool_version = j.at("provenance").value("tool_version", "");
    }
    return m;
}

void write_calibration(const std::string& path, const CalibrationParams& calib) {
    calib.validate();
    const std::string alpha_name = fs::path(path).filename().string() + ".alpha.f32";
    json j;
    j["format"] = "pitof-calibration";
    j["version"] = 1;
    j["k0"] = calib.k0;
    j["phi0"] = calib.phi0;
    j["mod_freq"] = calib.mod_freq;
    j["alpha_median"] = calib.alpha_median;
    j["alpha_plane"] = alpha_name;
    j["width"] = calib.alpha.empty() ? 0 : calib.alpha.width();
    j["height"] = calib.alpha.empty() ? 0 : calib.alpha.height();
    if (!calib.alpha.empty()) {
        const fs::path sibling = fs::path(path).parent_path() / alpha_name;
        write_plane_f32(sibling.string(), calib.alpha);
    }
    atomic_write(path, j.dump(2) + "\n");
}

CalibrationParams read_calibration(const std::string& path, bool strict) {
    json j = json::parse(read_all(path));
    check_keys(j,
               {"format", "version", "k0", "phi0", "mod_freq", "alpha_median", "alpha_plane",
                "width", "height"},
               strict, "calibration");
    if (j.value("format", "") != "pitof-calibration")
        throw ConfigError("not a calibration file: " + path);

    CalibrationParams calib;
    calib.k0 = j.at("k0").get<double>();
    calib.phi0 = j.at("phi0").get<double>();
    calib.mod_freq = j.at("mod_freq").get<double>();
    calib.alpha_median = j.at("alpha_median").get<double>();
    const int w = j.value("width", 0);
    const int h = j.value("height", 0);
    if (w > 0 && h > 0) {
        const fs::path sibling =
            fs::path(path).parent_path() / j.at("alpha_plane").get<std::string>();
        calib.alpha = read_plane_f32(sibling.string(), w, h);
    }
    calib.validate();
    return calib;
}

void append_metrics_row(const std::string& path, const MetricsRow& row) {
    const bool exists = fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open metrics file: " + path);
    if (!exists) {
        out << "# rel_error = mean(|d - d_gt| / d_gt) over valid pixels; rmse/std_dev in cm\n";
        out << "scene,method,fog_preset,rmse_cm,rel_error,std_dev_cm,valid_fraction,runtime_ms\n";
    }
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.3f", row.metrics.rmse_cm,
                  row.metrics.rel_error, row.metrics.std_dev_cm, row.metrics.valid_fraction,
                  row.runtime_ms);
    out << csv_escape(row.scene) << ',' << csv_escape(row.method) << ','
        << csv_escape(row.fog_preset) << ',' << buf << '\n';
    if (!out) throw IoError("failed to append metrics row to " + path);
}

std::string decay_curve_csv(double sigma_i, double sigma_p, const CameraConfig& cam,
                            double min_dist, double max_dist, int steps) {
    if (!(sigma_i > 0.0) || !(sigma_p >= 0.0))
        throw ConfigError("decay curve: need sigma_i > 0 and sigma_p >= 0");
    if (steps < 2 || !(max_dist > min_dist) || !(min_dist > 0.0))
        throw ConfigError("decay curve: bad distance grid");

    std::string body = "distance_m,intensity_nofog,intensity_fog,intensity_fog_polarizer\n";
    char line[256];
    for (int i = 0; i < steps; ++i) {
        const double d = min_dist + (max_dist - min_dist) * i / (steps - 1);
        const double phi = depth_to_phase(d, cam);
        const double nofog = 1.0 / (phi * phi);
        const double fog = nofog * std::exp(-sigma_i * phi);
        const double pol = fog * std::exp(-sigma_p * phi);
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", d, nofog, fog, pol);
        body += line;
    }
    return body;
}

} // namespace pitof
