#include "nlq/state_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace nlq {

namespace {

using nlohmann::json;

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": cannot parse number '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v))
        throw std::invalid_argument(what + ": cannot parse number '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(s.substr(pos));
            return parts;
        }
        parts.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
}

DensityMatrix parse_preset(const std::string& spec) {
    const auto parts = split(spec, ':');  // parts[0] == "preset"
    const std::string& name = parts.size() > 1 ? parts[1] : "";
    const std::size_t argc = parts.size() - 2;

    auto need = [&](std::size_t n) {
        if (argc != n) {
            std::ostringstream os;
            os << "preset:" << name << " takes " << n << " argument" << (n == 1 ? "" : "s")
               << ", got " << argc;
            throw std::invalid_argument(os.str());
        }
    };

    if (name == "bell") {
        need(0);
        return bell_state();
    }
    if (name == "pure-theta") {
        need(1);
        return pure_theta(parse_number(parts[2], "preset:pure-theta"));
    }
    if (name == "mems") {
        need(1);
        const double g = parse_number(parts[2], "preset:mems");
        if (g < 0.0 || g > 1.0)
            throw std::invalid_argument("preset:mems: gamma must lie in [0,1]");
        return mems(g);
    }
    if (name == "ghz3") {
        need(2);
        return ghz_two_qutrit(parse_number(parts[2], "preset:ghz3"),
                              parse_number(parts[3], "preset:ghz3"));
    }
    if (name == "noise") {
        need(1);
        const double d = parse_number(parts[2], "preset:noise");
        if (d < 4.0 || d != std::floor(d))
            throw std::invalid_argument("preset:noise: dimension must be an integer >= 4");
        return white_noise_state(std::size_t(d));
    }
    throw std::invalid_argument("unknown preset '" + name +
                                "' (known: bell, pure-theta, mems, ghz3, noise)");
}

cdouble parse_pair(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw std::invalid_argument(what + ": expected a [re,im] number pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::string format_double(double v, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

DensityMatrix parse_state_spec(const std::string& spec) {
    if (spec.rfind("preset:", 0) == 0) return parse_preset(spec);
    return load_state_file(spec);
}

DensityMatrix parse_state_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("state file parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("state file: top level must be an object");

    if (!j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 2 ||
        !j["dims"][0].is_number_unsigned() || !j["dims"][1].is_number_unsigned())
        throw std::invalid_argument("state file: \"dims\" must be two positive integers");
    Dims dims{j["dims"][0].get<std::size_t>(), j["dims"][1].get<std::size_t>()};
    if (dims.a == 0 || dims.b == 0)
        throw std::invalid_argument("state file: \"dims\" must be two positive integers");
    const std::size_t d = dims.total();

    if (!j.contains("kind") || !j["kind"].is_string())
        throw std::invalid_argument("state file: missing \"kind\" (pure or mixed)");
    const std::string kind = j["kind"].get<std::string>();

    if (kind == "pure") {
        if (!j.contains("amplitudes") || !j["amplitudes"].is_array())
            throw std::invalid_argument("state file: pure state needs an \"amplitudes\" array");
        const auto& amps = j["amplitudes"];
        if (amps.size() != d) {
            std::ostringstream os;
            os << "state file: expected " << d << " amplitudes for dims [" << dims.a << ","
               << dims.b << "], got " << amps.size();
            throw std::invalid_argument(os.str());
        }
        std::vector<cdouble> v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = parse_pair(amps[i], "state file: amplitudes");
        return pure_state(v, dims);
    }
    if (kind == "mixed") {
        if (!j.contains("matrix") || !j["matrix"].is_array())
            throw std::invalid_argument("state file: mixed state needs a \"matrix\" array");
        const auto& rows = j["matrix"];
        if (rows.size() != d)
            throw std::invalid_argument("state file: matrix row count does not match dims");
        ComplexMatrix m(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            if (!rows[i].is_array() || rows[i].size() != d)
                throw std::invalid_argument("state file: matrix must be square and match dims");
            for (std::size_t k = 0; k < d; ++k)
                m(i, k) = parse_pair(rows[i][k], "state file: matrix");
        }
        const auto report = validate_density(m);
        if (!report.pass)
            throw std::invalid_argument("state file: not a density matrix: " + report.message);
        return DensityMatrix(dims, m);
    }
    throw std::invalid_argument("state file: \"kind\" must be \"pure\" or \"mixed\", got \"" +
                                kind + "\"");
}

DensityMatrix load_state_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read state file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_state_json(buf.str());
}

std::string state_to_json(const DensityMatrix& rho) {
    const std::size_t d = rho.dims().total();
    std::ostringstream os;
    os << "{\"dims\":[" << rho.dims().a << "," << rho.dims().b << "],\"kind\":\"mixed\","
       << "\"matrix\":[";
    for (std::size_t i = 0; i < d; ++i) {
        os << (i ? ",[" : "[");
        for (std::size_t k = 0; k < d; ++k) {
            const cdouble v = rho.mat()(i, k);
            os << (k ? ",[" : "[") << format_double(v.real(), 17) << ","
               << format_double(v.imag(), 17) << "]";
        }
        os << "]";
    }
    os << "]}";
    return os.str();
}

}  // namespace nlq
