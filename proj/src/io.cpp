#include <slopepath/error.hpp>
#include <slopepath/io.hpp>

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace slopepath::io {

using nlohmann::json;

std::string format_real(double value)
{
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_real(const std::string& token)
{
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && std::isspace(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(token[e - 1]))) --e;
    if (b < e && token[b] == '+') ++b;
    double value = 0.0;
    const auto res = std::from_chars(token.data() + b, token.data() + e, value);
    if (res.ec != std::errc{} || res.ptr != token.data() + e || b == e) {
        throw Error(ErrorCode::ParseError, "not a number: '" + token + "'");
    }
    return value;
}

namespace {

std::vector<std::string> split_fields(const std::string& line)
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

bool is_numeric_row(const std::vector<std::string>& fields)
{
    try {
        for (const auto& f : fields) parse_real(f);
    } catch (const Error&) {
        return false;
    }
    return true;
}

std::string strip_cr(std::string line)
{
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    return in;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + path);
    return out;
}

json real_or_null(double value)
{
    return std::isfinite(value) ? json(value) : json(nullptr);
}

double real_from(const json& j, double nullValue = kInfinity)
{
    if (j.is_null()) return nullValue;
    if (!j.is_number()) throw Error(ErrorCode::ParseError, "expected a number, got " + j.dump());
    return j.get<double>();
}

json vector_json(const Vector& v)
{
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(real_or_null(v[i]));
    return arr;
}

Vector vector_from(const json& j)
{
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = real_from(j[i]);
    return v;
}

json event_json(const PathEvent& e)
{
    return json{{"kind", to_string(e.kind)}, {"eta", real_or_null(e.eta)}, {"g", e.group},
                {"k", e.k}, {"nonzero", e.nonzeroCoefficients}, {"groups", e.nonzeroGroups}};
}

PathEvent event_from(const json& j)
{
    PathEvent e;
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.eta = real_from(j.at("eta"));
    e.group = j.at("g").get<int>();
    e.k = j.at("k").get<int>();
    e.nonzeroCoefficients = j.at("nonzero").get<int>();
    e.nonzeroGroups = j.at("groups").get<int>();
    return e;
}

json ray_json(const WeightRay& ray)
{
    return json{{"lambda0", vector_json(ray.lambda0)}, {"lambda_bar", vector_json(ray.lambdaBar)},
                {"eta_max", real_or_null(ray.etaMax)}};
}

WeightRay ray_from(const json& j)
{
    WeightRay ray;
    ray.lambda0 = vector_from(j.at("lambda0"));
    ray.lambdaBar = vector_from(j.at("lambda_bar"));
    ray.etaMax = j.contains("eta_max") ? real_from(j.at("eta_max")) : kInfinity;
    return ray;
}

} // namespace

ProblemInstance parse_instance_csv(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    std::size_t width = 0;
    long lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        line = strip_cr(line);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (first && !is_numeric_row(fields)) {
            first = false;
            continue;
        }
        first = false;
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            throw Error(ErrorCode::DimensionMismatch,
                        "line " + std::to_string(lineNo) + " has " + std::to_string(fields.size()) + " fields, expected "
                            + std::to_string(width));
        }
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_real(f));
        rows.push_back(std::move(row));
    }
    if (rows.empty() || width < 2) {
        throw Error(ErrorCode::InvalidDimension, "instance CSV needs at least one row and two columns");
    }
    ProblemInstance inst;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(width - 1);
    inst.y.resize(n);
    inst.X.resize(n, p);
    for (Eigen::Index r = 0; r < n; ++r) {
        inst.y[r] = rows[r][0];
        for (Eigen::Index j = 0; j < p; ++j) inst.X(r, j) = rows[r][j + 1];
    }
    return inst;
}

void write_instance_csv(std::ostream& out, const ProblemInstance& instance)
{
    out << "y";
    for (Eigen::Index j = 0; j < instance.p(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (Eigen::Index r = 0; r < instance.n(); ++r) {
        out << format_real(instance.y[r]);
        for (Eigen::Index j = 0; j < instance.p(); ++j) out << ',' << format_real(instance.X(r, j));
        out << '\n';
    }
}

std::string sidecar_path(const std::string& csvPath)
{
    return std::filesystem::path(csvPath).replace_extension(".json").string();
}

ProblemInstance read_instance(const std::string& csvPath)
{
    auto in = open_in(csvPath);
    ProblemInstance inst = parse_instance_csv(in);
    const std::string side = sidecar_path(csvPath);
    if (side != csvPath && std::filesystem::exists(side)) {
        auto sin = open_in(side);
        json meta;
        try {
            meta = json::parse(sin);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, side + ": " + e.what());
        }
        if (meta.contains("ridge")) inst.ridge = real_from(meta.at("ridge"), 0.0);
    }
    return inst;
}

void write_instance(const std::string& csvPath, const ProblemInstance& instance)
{
    auto out = open_out(csvPath);
    write_instance_csv(out, instance);
    auto side = open_out(sidecar_path(csvPath));
    side << json{{"ridge", instance.ridge}, {"n", instance.n()}, {"p", instance.p()}}.dump(2) << '\n';
}

Vector parse_vector(std::istream& in)
{
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const auto fields = split_fields(line);
        if (first && !is_numeric_row(fields)) {
            first = false;
            continue;
        }
        first = false;
        for (const auto& f : fields) values.push_back(parse_real(f));
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector read_vector(const std::string& path)
{
    auto in = open_in(path);
    return parse_vector(in);
}

void write_vector_csv(std::ostream& out, const Vector& v, const std::string& header)
{
    if (!header.empty()) out << header << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) out << format_real(v[i]) << '\n';
}

void write_vector(const std::string& path, const Vector& v)
{
    auto out = open_out(path);
    write_vector_csv(out, v);
}

std::string ray_to_json(const WeightRay& ray)
{
    return ray_json(ray).dump();
}

WeightRay ray_from_json(const std::string& text)
{
    try {
        return ray_from(json::parse(text));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("weight ray: ") + e.what());
    }
}

void write_path_jsonl(std::ostream& out, const SolutionPath& path)
{
    const auto& d = path.diagnostics;
    json header{{"record", "header"},
                {"instance_hash", path.provenance.instanceHash},
                {"ray", ray_json(path.provenance.ray)},
                {"options", path.provenance.options},
                {"segments", path.segments.size()},
                {"events", path.events.size()},
                {"diagnostics",
                 {{"fuse", d.fuseEvents},
                  {"split", d.splitEvents},
                  {"switch_order", d.orderSwitchEvents},
                  {"switch_sign", d.signSwitchEvents},
                  {"inverse_checks", d.inverseChecks},
                  {"fallback_refactorizations", d.fallbackRefactorizations},
                  {"max_inverse_error", d.maxInverseError},
                  {"initial_nonzero", d.initialNonzero},
                  {"initial_groups", d.initialGroups}}}};
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < path.events.size(); ++i) {
        json rec = event_json(path.events[i]);
        rec["record"] = "event";
        rec["index"] = i;
        out << rec.dump() << '\n';
    }
    for (const auto& seg : path.segments) {
        json rec{{"record", "segment"},
                 {"eta_start", real_or_null(seg.etaStart)},
                 {"eta_end", real_or_null(seg.etaEnd)},
                 {"beta_start", vector_json(seg.betaStart)},
                 {"slope", vector_json(seg.slope)},
                 {"event", event_json(seg.endingEvent)}};
        out << rec.dump() << '\n';
    }
}

SolutionPath read_path_jsonl(std::istream& in)
{
    SolutionPath path;
    std::string line;
    long lineNo = 0;
    bool sawHeader = false;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json rec = json::parse(line);
            const std::string kind = rec.at("record").get<std::string>();
            if (kind == "header") {
                sawHeader = true;
                path.provenance.instanceHash = rec.at("instance_hash").get<std::string>();
                path.provenance.ray = ray_from(rec.at("ray"));
                path.provenance.options = rec.at("options").get<std::string>();
                const json& d = rec.at("diagnostics");
                path.diagnostics.fuseEvents = d.at("fuse").get<std::int64_t>();
                path.diagnostics.splitEvents = d.at("split").get<std::int64_t>();
                path.diagnostics.orderSwitchEvents = d.at("switch_order").get<std::int64_t>();
                path.diagnostics.signSwitchEvents = d.at("switch_sign").get<std::int64_t>();
                path.diagnostics.inverseChecks = d.at("inverse_checks").get<std::int64_t>();
                path.diagnostics.fallbackRefactorizations = d.at("fallback_refactorizations").get<std::int64_t>();
                path.diagnostics.maxInverseError = d.at("max_inverse_error").get<double>();
                path.diagnostics.initialNonzero = d.value("initial_nonzero", 0);
                path.diagnostics.initialGroups = d.value("initial_groups", 0);
            } else if (kind == "event") {
                path.events.push_back(event_from(rec));
            } else if (kind == "segment") {
                PathSegment seg;
                seg.etaStart = real_from(rec.at("eta_start"));
                seg.etaEnd = real_from(rec.at("eta_end"));
                seg.betaStart = vector_from(rec.at("beta_start"));
                seg.slope = vector_from(rec.at("slope"));
                seg.endingEvent = event_from(rec.at("event"));
                path.segments.push_back(std::move(seg));
            } else {
                throw Error(ErrorCode::ParseError, "unknown record type '" + kind + "'");
            }
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ParseError, "path line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
    if (!sawHeader) throw Error(ErrorCode::ParseError, "path file has no header record");
    return path;
}

void write_events_csv(std::ostream& out, const SolutionPath& path)
{
    out << "index,eta,kind,g,k\n";
    for (std::size_t i = 0; i < path.events.size(); ++i) {
        const auto& e = path.events[i];
        out << i << ',' << format_real(e.eta) << ',' << to_string(e.kind) << ',' << e.group << ',' << e.k << '\n';
    }
}

} // namespace slopepath::io
