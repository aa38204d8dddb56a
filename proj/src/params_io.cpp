#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ez/error.hpp"
#include "ez/simcore.hpp"

namespace ez {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view key, std::string_view text) {
    text = trim(text);
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError("params: key '" + std::string(key) + "' expects a number, got '" +
                              std::string(text) + "'");
    return value;
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(parse_number(key, text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

void append_list(std::ostringstream& os, const char* key, const std::vector<double>& values) {
    os << key << " =";
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : " ") << values[i];
    os << '\n';
}

} // namespace

MissileParams parse_params(std::string_view text) {
    MissileParams p;
    std::map<std::string, std::function<void(std::string_view)>, std::less<>> setters;
    auto scalar = [&](const char* key, double& field) {
        setters[key] = [&field, key](std::string_view v) { field = parse_number(key, v); };
    };
    setters["name"] = [&](std::string_view v) { p.name = std::string(v); };
    scalar("launch_mass", p.launch_mass);
    scalar("propellant_mass_boost", p.propellant_mass_boost);
    scalar("propellant_mass_sustain", p.propellant_mass_sustain);
    scalar("boost_thrust", p.boost_thrust);
    scalar("boost_duration", p.boost_duration);
    scalar("sustain_thrust", p.sustain_thrust);
    scalar("sustain_duration", p.sustain_duration);
    scalar("ref_area", p.ref_area);
    scalar("nav_constant", p.nav_constant);
    scalar("g_limit", p.g_limit);
    scalar("loft_pitch_deg", p.loft_pitch_deg);
    scalar("loft_duration", p.loft_duration);
    scalar("seeker_activation_range", p.seeker_activation_range);
    scalar("hit_radius", p.hit_radius);
    scalar("max_flight_time", p.max_flight_time);
    scalar("min_speed", p.min_speed);
    setters["cd_mach"] = [&](std::string_view v) { p.cd_table.mach = parse_list("cd_mach", v); };
    setters["cd_power_on"] = [&](std::string_view v) { p.cd_table.cd_power_on = parse_list("cd_power_on", v); };
    setters["cd_power_off"] = [&](std::string_view v) { p.cd_table.cd_power_off = parse_list("cd_power_off", v); };

    bool saw_version = false;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("params line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (!saw_version) {
            if (key != "format_version")
                throw ValidationError("params: first key must be format_version");
            if (parse_number(key, value) != 1.0)
                throw ValidationError("params: unsupported format_version '" + std::string(value) + "'");
            saw_version = true;
            continue;
        }
        auto it = setters.find(key);
        if (it == setters.end())
            throw ValidationError("params line " + std::to_string(line_no) + ": unknown key '" +
                                  std::string(key) + "'");
        it->second(value);
    }
    if (!saw_version) throw ValidationError("params: missing format_version");
    p.validate();
    return p;
}

std::string format_params(const MissileParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "format_version = 1\n";
    os << "name = " << p.name << '\n';
    os << "launch_mass = " << p.launch_mass << '\n';
    os << "propellant_mass_boost = " << p.propellant_mass_boost << '\n';
    os << "propellant_mass_sustain = " << p.propellant_mass_sustain << '\n';
    os << "boost_thrust = " << p.boost_thrust << '\n';
    os << "boost_duration = " << p.boost_duration << '\n';
    os << "sustain_thrust = " << p.sustain_thrust << '\n';
    os << "sustain_duration = " << p.sustain_duration << '\n';
    os << "ref_area = " << p.ref_area << '\n';
    append_list(os, "cd_mach", p.cd_table.mach);
    append_list(os, "cd_power_on", p.cd_table.cd_power_on);
    append_list(os, "cd_power_off", p.cd_table.cd_power_off);
    os << "nav_constant = " << p.nav_constant << '\n';
    os << "g_limit = " << p.g_limit << '\n';
    os << "loft_pitch_deg = " << p.loft_pitch_deg << '\n';
    os << "loft_duration = " << p.loft_duration << '\n';
    os << "seeker_activation_range = " << p.seeker_activation_range << '\n';
    os << "hit_radius = " << p.hit_radius << '\n';
    os << "max_flight_time = " << p.max_flight_time << '\n';
    os << "min_speed = " << p.min_speed << '\n';
    return os.str();
}

MissileParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArtifactError("cannot open params file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_params(buffer.str());
}

MissileParams resolve_params(const std::string& preset_or_path) {
    if (preset_or_path == "sam_a" || preset_or_path == "sam_b") return preset(preset_or_path);
    if (!std::filesystem::exists(preset_or_path))
        throw ValidationError("--sam '" + preset_or_path + "' is neither a preset nor an existing file");
    return load_params(preset_or_path);
}

} // namespace ez
