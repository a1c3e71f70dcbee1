#include "aerobat/config.hpp"

#include <fstream>
#include <sstream>

namespace aerobat::config {

namespace {

Json vec(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Json mat(const Mat3& m) {
    Json rows = Json::array();
    for (int i = 0; i < 3; ++i) rows.push_back(Json::array({m(i, 0), m(i, 1), m(i, 2)}));
    return rows;
}

Json anchors(const std::array<Vec3, 4>& a) {
    Json out = Json::array();
    for (const Vec3& v : a) out.push_back(vec(v));
    return out;
}

std::string joinKeys() {
    std::string out;
    for (const std::string& k : validKeys()) out += "\n  " + k;
    return out;
}

const Json& at(const Json& doc, const std::string& dotted) {
    const Json* node = &doc;
    std::stringstream ss(dotted);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (!node->is_object() || !node->contains(part)) throw ConfigError("missing configuration key '" + dotted + "'");
        node = &(*node)[part];
    }
    return *node;
}

double num(const Json& doc, const std::string& key) {
    const Json& v = at(doc, key);
    if (!v.is_number()) throw ConfigError("configuration key '" + key + "' must be a number");
    return v.get<double>();
}

int integer(const Json& doc, const std::string& key) {
    const Json& v = at(doc, key);
    if (!v.is_number_integer()) throw ConfigError("configuration key '" + key + "' must be an integer");
    return v.get<int>();
}

bool boolean(const Json& doc, const std::string& key) {
    const Json& v = at(doc, key);
    if (!v.is_boolean()) throw ConfigError("configuration key '" + key + "' must be true or false");
    return v.get<bool>();
}

std::string text(const Json& doc, const std::string& key) {
    const Json& v = at(doc, key);
    if (!v.is_string()) throw ConfigError("configuration key '" + key + "' must be a string");
    return v.get<std::string>();
}

Vec3 vec3(const Json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 3) throw ConfigError("configuration key '" + key + "' must be a 3-element array");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw ConfigError("configuration key '" + key + "' must hold numbers");
        out(i) = v[i].get<double>();
    }
    return out;
}

Vec3 vec3At(const Json& doc, const std::string& key) { return vec3(at(doc, key), key); }

Mat3 mat3(const Json& doc, const std::string& key) {
    const Json& v = at(doc, key);
    if (!v.is_array() || v.size() != 3) throw ConfigError("configuration key '" + key + "' must be a 3x3 array");
    Mat3 out;
    for (int i = 0; i < 3; ++i) out.row(i) = vec3(v[i], key).transpose();
    return out;
}

std::array<Vec3, 4> anchors(const Json& doc, const std::string& key) {
    const Json& v = at(doc, key);
    if (!v.is_array() || v.size() != 4) throw ConfigError("configuration key '" + key + "' must list four points");
    std::array<Vec3, 4> out;
    for (std::size_t j = 0; j < 4; ++j) out[j] = vec3(v[j], key);
    return out;
}

void collectKeys(const Json& node, const std::string& prefix, std::vector<std::string>& out) {
    for (auto it = node.begin(); it != node.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            collectKeys(*it, key, out);
        else
            out.push_back(key);
    }
}

bool sameShape(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return !a.is_number_integer() || b.is_number_integer();
    if (a.type() != b.type()) return false;
    if (a.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!sameShape(a[i], b[i])) return false;
    }
    return true;
}

std::string typeName(const Json& v) {
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    if (v.is_array()) return "array of " + std::to_string(v.size());
    return v.type_name();
}

void setLeaf(Json& base, const std::string& key, const Json& value) {
    Json* node = &base;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i]) || (i + 1 < parts.size() && !(*node)[parts[i]].is_object()) ||
            (i + 1 == parts.size() && (*node)[parts[i]].is_object()))
            throw ConfigError("unknown configuration key '" + key + "'; valid keys are:" + joinKeys());
        node = &(*node)[parts[i]];
    }
    if (!sameShape(*node, value))
        throw ConfigError("configuration key '" + key + "' expects " + typeName(*node) + ", got " + value.dump());
    *node = value;
}

}  // namespace

Json toJson(const sim::SimConfig& c) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["sim"] = {{"dt_plant", c.dt_plant},
                  {"control_rate", c.control_rate},
                  {"duration", c.duration},
                  {"metrics_window", c.metrics_window},
                  {"seed", c.seed}};
    doc["gait"] = {{"frequency", c.gait.frequency},
                   {"proximal_amplitude", c.gait.proximal_amplitude},
                   {"fold_amplitude", c.gait.fold_amplitude},
                   {"fold_phase", c.gait.fold_phase},
                   {"proximal_mean", c.gait.proximal_mean},
                   {"fold_mean", c.gait.fold_mean}};
    doc["aero"] = {{"strips", c.aero.strips},
                   {"order", c.aero.order},
                   {"root_chord", c.aero.root_chord},
                   {"air_density", c.aero.air.air_density},
                   {"lift_slope", c.aero.air.lift_slope},
                   {"wagner_form", aero::toString(c.aero.wagner.form)},
                   {"lag_input", aero::toString(c.aero.lag_input)},
                   {"psi1", c.aero.wagner.psi1},
                   {"psi2", c.aero.wagner.psi2},
                   {"eps1", c.aero.wagner.eps1},
                   {"eps2", c.aero.wagner.eps2}};
    doc["guard"] = {{"mass", c.guard.mass},
                    {"inertia", mat(c.guard.inertia)},
                    {"arm_x", c.guard.arm_x},
                    {"arm_y", c.guard.arm_y},
                    {"arm_z", c.guard.arm_z},
                    {"thrust_min", c.guard.thrust_min},
                    {"thrust_max", c.guard.thrust_max},
                    {"yaw_thrusters_vertical", c.guard.yaw_thrusters_vertical}};
    const vehicle::AerobatParams& a = c.aerobat;
    doc["aerobat"] = {{"torso_mass", a.torso_mass},
                      {"torso_size", vec(a.torso_size)},
                      {"shoulder_offset", a.shoulder_offset},
                      {"proximal_mass", a.proximal.mass},
                      {"proximal_length", a.proximal.length},
                      {"proximal_chord", a.proximal.chord},
                      {"distal_mass", a.distal.mass},
                      {"distal_length", a.distal.length},
                      {"distal_chord", a.distal.chord},
                      {"band_stiffness", a.band_stiffness},
                      {"band_rest_length", a.band_rest_length},
                      {"band_damping", a.band_damping},
                      {"guard_anchors", anchors(a.guard_anchors)},
                      {"body_anchors", anchors(a.body_anchors)}};
    doc["observer"] = {{"omega0", c.controller.observer_bandwidth},
                       {"divergence_ceiling", c.controller.divergence_ceiling}};
    doc["controller"] = {{"position_pole", c.controller.position_pole},
                         {"attitude_pole", c.controller.attitude_pole},
                         {"max_tilt", c.controller.max_tilt},
                         {"g2_condition_limit", c.controller.g2_condition_limit},
                         {"setpoint", vec(c.controller.setpoint.position)},
                         {"setpoint_yaw", c.controller.setpoint.yaw}};
    doc["initial"] = {{"position_offset", vec(c.initial.position_offset)},
                      {"attitude_offset", vec(c.initial.attitude_offset)},
                      {"velocity", vec(c.initial.velocity)},
                      {"omega", vec(c.initial.omega)},
                      {"aerobat_offset", vec(c.initial.aerobat_offset)}};
    doc["forces"] = {{"gravity", c.forces.gravity},
                     {"thrusters", c.forces.thrusters},
                     {"aero", c.forces.aero},
                     {"bands", c.forces.bands}};
    doc["sensor"] = {{"position_sigma", c.sensor.position_sigma}, {"rate_sigma", c.sensor.rate_sigma}};
    doc["output"] = {{"dir", c.output_dir}, {"csv", c.csv_name}, {"metadata", c.metadata_name}};
    return doc;
}

sim::SimConfig fromJson(const Json& d) {
    if (!d.is_object()) throw ConfigError("configuration must be a JSON object");
    if (integer(d, "schema_version") != kSchemaVersion)
        throw ConfigError("unsupported schema_version " + at(d, "schema_version").dump() + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    sim::SimConfig c;
    c.dt_plant = num(d, "sim.dt_plant");
    c.control_rate = num(d, "sim.control_rate");
    c.duration = num(d, "sim.duration");
    c.metrics_window = num(d, "sim.metrics_window");
    const Json& seed = at(d, "sim.seed");
    if (!seed.is_number_unsigned()) throw ConfigError("configuration key 'sim.seed' must be a non-negative integer");
    c.seed = seed.get<std::uint64_t>();

    c.gait.frequency = num(d, "gait.frequency");
    c.gait.proximal_amplitude = num(d, "gait.proximal_amplitude");
    c.gait.fold_amplitude = num(d, "gait.fold_amplitude");
    c.gait.fold_phase = num(d, "gait.fold_phase");
    c.gait.proximal_mean = num(d, "gait.proximal_mean");
    c.gait.fold_mean = num(d, "gait.fold_mean");

    c.aero.strips = integer(d, "aero.strips");
    c.aero.order = integer(d, "aero.order");
    c.aero.root_chord = num(d, "aero.root_chord");
    c.aero.air.air_density = num(d, "aero.air_density");
    c.aero.air.lift_slope = num(d, "aero.lift_slope");
    c.aero.wagner.form = aero::wagnerFormFromString(text(d, "aero.wagner_form"));
    c.aero.lag_input = aero::lagInputVariantFromString(text(d, "aero.lag_input"));
    c.aero.wagner.psi1 = num(d, "aero.psi1");
    c.aero.wagner.psi2 = num(d, "aero.psi2");
    c.aero.wagner.eps1 = num(d, "aero.eps1");
    c.aero.wagner.eps2 = num(d, "aero.eps2");

    c.guard.mass = num(d, "guard.mass");
    c.guard.inertia = mat3(d, "guard.inertia");
    c.guard.arm_x = num(d, "guard.arm_x");
    c.guard.arm_y = num(d, "guard.arm_y");
    c.guard.arm_z = num(d, "guard.arm_z");
    c.guard.thrust_min = num(d, "guard.thrust_min");
    c.guard.thrust_max = num(d, "guard.thrust_max");
    c.guard.yaw_thrusters_vertical = boolean(d, "guard.yaw_thrusters_vertical");

    vehicle::AerobatParams& a = c.aerobat;
    a.torso_mass = num(d, "aerobat.torso_mass");
    a.torso_size = vec3At(d, "aerobat.torso_size");
    a.shoulder_offset = num(d, "aerobat.shoulder_offset");
    a.proximal = {num(d, "aerobat.proximal_mass"), num(d, "aerobat.proximal_length"), num(d, "aerobat.proximal_chord")};
    a.distal = {num(d, "aerobat.distal_mass"), num(d, "aerobat.distal_length"), num(d, "aerobat.distal_chord")};
    a.band_stiffness = num(d, "aerobat.band_stiffness");
    a.band_rest_length = num(d, "aerobat.band_rest_length");
    a.band_damping = num(d, "aerobat.band_damping");
    a.guard_anchors = anchors(d, "aerobat.guard_anchors");
    a.body_anchors = anchors(d, "aerobat.body_anchors");

    c.controller.observer_bandwidth = num(d, "observer.omega0");
    c.controller.divergence_ceiling = num(d, "observer.divergence_ceiling");
    c.controller.position_pole = num(d, "controller.position_pole");
    c.controller.attitude_pole = num(d, "controller.attitude_pole");
    c.controller.max_tilt = num(d, "controller.max_tilt");
    c.controller.g2_condition_limit = num(d, "controller.g2_condition_limit");
    c.controller.setpoint.position = vec3At(d, "controller.setpoint");
    c.controller.setpoint.yaw = num(d, "controller.setpoint_yaw");

    c.initial.position_offset = vec3At(d, "initial.position_offset");
    c.initial.attitude_offset = vec3At(d, "initial.attitude_offset");
    c.initial.velocity = vec3At(d, "initial.velocity");
    c.initial.omega = vec3At(d, "initial.omega");
    c.initial.aerobat_offset = vec3At(d, "initial.aerobat_offset");

    c.forces.gravity = boolean(d, "forces.gravity");
    c.forces.thrusters = boolean(d, "forces.thrusters");
    c.forces.aero = boolean(d, "forces.aero");
    c.forces.bands = boolean(d, "forces.bands");
    c.sensor.position_sigma = num(d, "sensor.position_sigma");
    c.sensor.rate_sigma = num(d, "sensor.rate_sigma");
    c.output_dir = text(d, "output.dir");
    c.csv_name = text(d, "output.csv");
    c.metadata_name = text(d, "output.metadata");
    return c;
}

std::vector<std::string> validKeys() {
    std::vector<std::string> keys;
    collectKeys(toJson(sim::SimConfig{}), "", keys);
    return keys;
}

void merge(Json& base, const Json& partial) {
    if (!partial.is_object()) throw ConfigError("configuration must be a JSON object");
    std::vector<std::string> keys;
    collectKeys(partial, "", keys);
    for (const std::string& key : keys) setLeaf(base, key, at(partial, key));
}

void applyOverride(Json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' must have the form section.key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    Json value = Json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    setLeaf(doc, key, value);
}

Json loadFile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    Json parsed = Json::parse(in, nullptr, false);
    if (parsed.is_discarded()) throw ConfigError("config file '" + path.string() + "' is not valid JSON");
    if (!parsed.is_object()) throw ConfigError("config file '" + path.string() + "' must hold a JSON object");
    if (!parsed.contains("schema_version"))
        throw ConfigError("config file '" + path.string() + "' lacks schema_version");
    Json doc = toJson(sim::SimConfig{});
    merge(doc, parsed);
    return doc;
}

sim::SimConfig resolve(const std::filesystem::path* path, const std::vector<std::string>& overrides, Json* echo) {
    Json doc = path ? loadFile(*path) : toJson(sim::SimConfig{});
    for (const std::string& o : overrides) applyOverride(doc, o);
    sim::SimConfig cfg = fromJson(doc);
    cfg.validate();
    if (echo) *echo = doc;
    return cfg;
}

}  // namespace aerobat::config
