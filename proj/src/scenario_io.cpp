#include "mobisim/scenario_io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "mobisim/error.hpp"
#include "mobisim/numfmt.hpp"

#ifndef MOBISIM_VERSION
#define MOBISIM_VERSION "0.0.0"
#endif

namespace mobisim {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join_path(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path.empty() ? "document" : path, "must be a JSON object");
}

void reject_unknown_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError(join_path(path, key), "is not a recognized key");
        }
    }
}

double read_number(const json& obj, const std::string& path, const char* key, double fallback, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw ValidationError(join_path(path, key), "is required");
        return fallback;
    }
    if (!it->is_number()) throw ValidationError(join_path(path, key), "must be a number");
    return it->get<double>();
}

std::int64_t read_integer(const json& obj, const std::string& path, const char* key, std::int64_t fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) throw ValidationError(join_path(path, key), "must be an integer");
    return it->get<std::int64_t>();
}

std::string read_string(const json& obj, const std::string& path, const char* key, std::string fallback,
                        bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw ValidationError(join_path(path, key), "is required");
        return fallback;
    }
    if (!it->is_string()) throw ValidationError(join_path(path, key), "must be a string");
    return it->get<std::string>();
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    // nlohmann reports the 1-based count of bytes consumed.
    const std::size_t end = std::min(text.size(), byte == 0 ? 0 : byte - 1);
    std::size_t line = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i < end; ++i) {
        if (text[i] == '\n') {
            ++line;
            line_start = i + 1;
        }
    }
    return {line, end - line_start + 1};
}

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte);
        std::string msg = e.what();
        // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
        if (const auto pos = msg.find("] "); pos != std::string::npos) msg = msg.substr(pos + 2);
        throw ParseError(std::string("malformed ") + what + ": " + msg, line, col);
    }
}

std::string bytes_to_hex(const unsigned char* data, std::size_t n) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xF]);
    }
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.emplace_back(line.substr(start));
            break;
        }
        cells.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    for (auto& c : cells) {
        const auto b = c.find_first_not_of(" \t");
        const auto e = c.find_last_not_of(" \t");
        c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
    }
    return cells;
}

void check_increasing(const std::vector<double>& times) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw ValidationError("times", "not strictly increasing at sample " + std::to_string(i));
        }
    }
}

Trajectory read_csv(std::istream& in, std::vector<std::string>* warnings) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trajectory CSV", 1, 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    int col_t = -1, col_c = -1, col_a = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto& h = header[i];
        if (h == "t" && col_t < 0) {
            col_t = static_cast<int>(i);
        } else if (h == "congestion" && col_c < 0) {
            col_c = static_cast<int>(i);
        } else if (h == "adoption" && col_a < 0) {
            col_a = static_cast<int>(i);
        } else if (warnings) {
            warnings->push_back("ignoring extra column '" + h + "'");
        }
    }
    if (col_t < 0 || col_c < 0 || col_a < 0) {
        throw ParseError("trajectory CSV header must contain t, congestion and adoption columns", 1, 1);
    }

    Trajectory traj;
    std::size_t row = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                                 " cells, found " + std::to_string(cells.size()),
                             line_no, 1);
        }
        auto cell = [&](int col) {
            const auto v = parse_double(cells[static_cast<std::size_t>(col)]);
            if (!v || !std::isfinite(*v)) {
                throw ParseError("row " + std::to_string(row) + ", column '" + header[static_cast<std::size_t>(col)] +
                                     "': non-numeric cell '" + cells[static_cast<std::size_t>(col)] + "'",
                                 line_no, 1);
            }
            return *v;
        };
        traj.times.push_back(cell(col_t));
        traj.states.push_back({cell(col_c), cell(col_a)});
    }
    check_increasing(traj.times);
    return traj;
}

std::vector<double> read_array(const json& doc, const char* key) {
    const auto it = doc.find(key);
    if (it == doc.end() || !it->is_array()) throw ValidationError(key, "must be an array");
    std::vector<double> out;
    out.reserve(it->size());
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& v = (*it)[i];
        if (!v.is_number()) throw ParseError(std::string(key) + "[" + std::to_string(i) + "]: non-numeric value");
        out.push_back(v.get<double>());
    }
    return out;
}

Trajectory read_json(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const json doc = parse_json(text, "trajectory JSON");
    require_object(doc, "");
    reject_unknown_keys(doc, "", {"manifest", "times", "congestion", "adoption", "diagnostics"});

    Trajectory traj;
    traj.times = read_array(doc, "times");
    const auto c = read_array(doc, "congestion");
    const auto a = read_array(doc, "adoption");
    if (c.size() != traj.times.size() || a.size() != traj.times.size()) {
        throw ValidationError("trajectory", "times, congestion and adoption must have equal lengths");
    }
    for (std::size_t i = 0; i < c.size(); ++i) traj.states.push_back({c[i], a[i]});
    check_increasing(traj.times);

    if (const auto it = doc.find("manifest"); it != doc.end()) {
        const RunManifest m = manifest_from_json(*it);
        traj.scenario_name = m.scenario.name;
        traj.params = m.scenario.params;
        traj.integrator = m.scenario.integrator;
    }
    if (const auto it = doc.find("diagnostics"); it != doc.end()) {
        const json& d = *it;
        require_object(d, "diagnostics");
        reject_unknown_keys(d, "diagnostics",
                            {"adoption_went_negative", "congestion_went_negative", "steps", "rejected_steps"});
        traj.diagnostics.adoption_went_negative = d.value("adoption_went_negative", false);
        traj.diagnostics.congestion_went_negative = d.value("congestion_went_negative", false);
        traj.diagnostics.steps = read_integer(d, "diagnostics", "steps", 0);
        traj.diagnostics.rejected_steps = read_integer(d, "diagnostics", "rejected_steps", 0);
    }
    return traj;
}

} // namespace

std::string_view version() { return MOBISIM_VERSION; }

ScenarioSpec scenario_from_json(const json& doc) {
    require_object(doc, "");
    reject_unknown_keys(doc, "", {"name", "description", "params", "initial", "horizon", "integrator"});

    ScenarioSpec spec;
    spec.name = read_string(doc, "", "name", "", true);
    spec.description = read_string(doc, "", "description", "", false);

    const auto params = doc.find("params");
    if (params == doc.end()) throw ValidationError("params", "is required");
    require_object(*params, "params");
    reject_unknown_keys(*params, "params", {"k1", "k2", "k3", "k4", "a_max"});
    spec.params.k1 = read_number(*params, "params", "k1", 0.0, true);
    spec.params.k2 = read_number(*params, "params", "k2", 0.0, true);
    spec.params.k3 = read_number(*params, "params", "k3", 0.0, true);
    spec.params.k4 = read_number(*params, "params", "k4", 0.0, true);
    spec.params.a_max = read_number(*params, "params", "a_max", 100.0, false);

    if (const auto it = doc.find("initial"); it != doc.end()) {
        require_object(*it, "initial");
        reject_unknown_keys(*it, "initial", {"congestion", "adoption"});
        spec.initial.congestion = read_number(*it, "initial", "congestion", spec.initial.congestion, false);
        spec.initial.adoption = read_number(*it, "initial", "adoption", spec.initial.adoption, false);
    }
    if (const auto it = doc.find("horizon"); it != doc.end()) {
        require_object(*it, "horizon");
        reject_unknown_keys(*it, "horizon", {"t0", "t_end", "output_points"});
        spec.horizon.t0 = read_number(*it, "horizon", "t0", spec.horizon.t0, false);
        spec.horizon.t_end = read_number(*it, "horizon", "t_end", spec.horizon.t_end, false);
        spec.horizon.output_points = read_integer(*it, "horizon", "output_points", spec.horizon.output_points);
    }
    if (const auto it = doc.find("integrator"); it != doc.end()) {
        require_object(*it, "integrator");
        reject_unknown_keys(*it, "integrator", {"method", "step", "rtol", "atol", "max_steps"});
        if (const auto m = it->find("method"); m != it->end()) {
            if (!m->is_string()) throw ValidationError("integrator.method", "must be a string");
            spec.integrator.method = parse_method(m->get<std::string>());
        }
        spec.integrator.step = read_number(*it, "integrator", "step", spec.integrator.step, false);
        spec.integrator.rtol = read_number(*it, "integrator", "rtol", spec.integrator.rtol, false);
        spec.integrator.atol = read_number(*it, "integrator", "atol", spec.integrator.atol, false);
        spec.integrator.max_steps = read_integer(*it, "integrator", "max_steps", spec.integrator.max_steps);
    }
    spec.validate();
    return spec;
}

ScenarioSpec parse_scenario(std::string_view text) {
    return scenario_from_json(parse_json(text, "scenario config"));
}

ordered_json scenario_to_json(const ScenarioSpec& spec) {
    ordered_json j;
    j["name"] = spec.name;
    j["description"] = spec.description;
    j["params"] = {{"k1", spec.params.k1},
                   {"k2", spec.params.k2},
                   {"k3", spec.params.k3},
                   {"k4", spec.params.k4},
                   {"a_max", spec.params.a_max}};
    j["initial"] = {{"congestion", spec.initial.congestion}, {"adoption", spec.initial.adoption}};
    j["horizon"] = {{"t0", spec.horizon.t0},
                    {"t_end", spec.horizon.t_end},
                    {"output_points", spec.horizon.output_points}};
    j["integrator"] = {{"method", std::string(to_string(spec.integrator.method))},
                       {"step", spec.integrator.step},
                       {"rtol", spec.integrator.rtol},
                       {"atol", spec.integrator.atol},
                       {"max_steps", spec.integrator.max_steps}};
    return j;
}

std::string serialize_scenario(const ScenarioSpec& spec) { return scenario_to_json(spec).dump(2) + "\n"; }

ScenarioSpec load_scenario_file(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

TrajectoryFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".json" ? TrajectoryFormat::Json : TrajectoryFormat::Csv;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string content_hash(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    return "sha256:" + bytes_to_hex(digest.data(), len);
}

RunManifest make_manifest(const ScenarioSpec& spec, const Trajectory& traj) {
    return {spec, std::string(version()), utc_timestamp(), content_hash(trajectory_csv(traj))};
}

RunManifest make_manifest(const Trajectory& traj) {
    ScenarioSpec spec;
    spec.name = traj.scenario_name;
    spec.params = traj.params;
    spec.integrator = traj.integrator;
    if (!traj.states.empty()) spec.initial = traj.states.front();
    if (traj.times.size() >= 2) {
        spec.horizon = {traj.times.front(), traj.times.back(), static_cast<std::int64_t>(traj.times.size())};
    }
    return make_manifest(spec, traj);
}

ordered_json manifest_to_json(const RunManifest& m) {
    ordered_json j;
    j["scenario"] = scenario_to_json(m.scenario);
    j["version"] = m.version;
    j["timestamp"] = m.timestamp;
    j["content_hash"] = m.content_hash;
    return j;
}

RunManifest manifest_from_json(const json& doc) {
    require_object(doc, "manifest");
    reject_unknown_keys(doc, "manifest", {"scenario", "version", "timestamp", "content_hash"});
    RunManifest m;
    const auto it = doc.find("scenario");
    if (it == doc.end()) throw ValidationError("manifest.scenario", "is required");
    m.scenario = scenario_from_json(*it);
    m.version = read_string(doc, "manifest", "version", "", false);
    m.timestamp = read_string(doc, "manifest", "timestamp", "", false);
    m.content_hash = read_string(doc, "manifest", "content_hash", "", false);
    return m;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "t,congestion,adoption\n";
    out.reserve(out.size() + traj.times.size() * 48);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += format_double(traj.times[i]);
        out += ',';
        out += format_double(traj.states[i].congestion);
        out += ',';
        out += format_double(traj.states[i].adoption);
        out += '\n';
    }
    return out;
}

std::string trajectory_json(const Trajectory& traj, const RunManifest& manifest) {
    ordered_json j;
    j["manifest"] = manifest_to_json(manifest);
    j["times"] = traj.times;
    std::vector<double> c, a;
    c.reserve(traj.states.size());
    a.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        c.push_back(s.congestion);
        a.push_back(s.adoption);
    }
    j["congestion"] = c;
    j["adoption"] = a;
    j["diagnostics"] = {{"adoption_went_negative", traj.diagnostics.adoption_went_negative},
                        {"congestion_went_negative", traj.diagnostics.congestion_went_negative},
                        {"steps", traj.diagnostics.steps},
                        {"rejected_steps", traj.diagnostics.rejected_steps}};
    return j.dump() + "\n";
}

namespace {

std::string render(const Trajectory& traj, TrajectoryFormat format, const RunManifest* manifest) {
    if (traj.times.size() != traj.states.size()) throw ValidationError("trajectory", "times/states length mismatch");
    if (format == TrajectoryFormat::Csv) return trajectory_csv(traj);
    if (manifest) return trajectory_json(traj, *manifest);
    return trajectory_json(traj, make_manifest(traj));
}

} // namespace

std::size_t write_trajectory(const Trajectory& traj, TrajectoryFormat format, std::ostream& out,
                             const RunManifest* manifest) {
    const std::string bytes = render(traj, format, manifest);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed to write trajectory");
    return bytes.size();
}

std::size_t write_trajectory(const Trajectory& traj, TrajectoryFormat format, const std::filesystem::path& path,
                             const RunManifest* manifest) {
    return write_file_atomic(path, render(traj, format, manifest));
}

Trajectory read_trajectory(std::istream& in, TrajectoryFormat format, std::vector<std::string>* warnings) {
    return format == TrajectoryFormat::Csv ? read_csv(in, warnings) : read_json(in);
}

Trajectory read_trajectory(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    return read_trajectory(in, format_for_path(path), warnings);
}

std::size_t write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string() + ": " + std::strerror(errno));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("failed writing " + path.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot write " + path.string() + ": " + ec.message());
    }
    return content.size();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace mobisim
