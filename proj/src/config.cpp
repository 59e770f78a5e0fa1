#include "sklab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace sklab::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

Ini Ini::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

Ini Ini::parse_text(const std::string& text) {
    Ini ini;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(line.substr(1, line.size() - 2));
            ini.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
}

std::optional<std::string> Ini::get(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

std::string Ini::normalized() const {
    std::ostringstream out;
    for (const auto& [sec, kv] : sections) {
        out << "[" << sec << "]\n";
        for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    }
    return out.str();
}

std::vector<double> parse_eps_schedule(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::istringstream in(text);
        std::string a, b, mode;
        std::getline(in, a, ':');
        std::getline(in, b, ':');
        std::getline(in, mode, ':');
        if (mode.empty()) mode = "decade";
        if (mode != "decade") throw ConfigError("eps schedule: unknown mode '" + mode + "'");
        const double start = std::stod(a), stop = std::stod(b);
        if (!(start > stop) || !(stop > 0))
            throw ConfigError("eps schedule: need start > stop > 0");
        for (double e = start; e > stop * (1.0 - 1e-12); e /= 10.0) out.push_back(e);
    } else {
        std::istringstream in(text);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(std::stod(item));
        }
    }
    if (out.empty()) throw ConfigError("eps schedule: empty");
    return out;
}

std::vector<std::string> FamilySpec::var_names() const {
    switch (domain) {
        case DomainKind::Interval: return {"x"};
        case DomainKind::Sphere: return {"x1", "x2", "x3"};
        case DomainKind::Torus: {
            std::vector<std::string> v;
            for (int p = 1; p <= n_complex; ++p) {
                v.push_back("x" + std::to_string(p));
                v.push_back("y" + std::to_string(p));
            }
            return v;
        }
    }
    return {};
}

FamilySpec validate_family(const Ini& ini) {
    FamilySpec fs;
    auto need = [&](const char* key) {
        const auto v = ini.get("family", key);
        if (!v) throw ConfigError(std::string("family config: missing key '") + key + "'");
        return *v;
    };
    const std::string dom = need("domain");
    if (dom == "interval") fs.domain = DomainKind::Interval;
    else if (dom == "torus") fs.domain = DomainKind::Torus;
    else if (dom == "sphere") fs.domain = DomainKind::Sphere;
    else throw ConfigError("family config: domain must be interval|torus|sphere, got " + dom);

    fs.g_text = need("g");
    fs.k = std::stoi(need("k"));
    if (fs.k < 1) throw ConfigError("family config: k must be >= 1");
    fs.eps_schedule = parse_eps_schedule(need("eps"));
    for (size_t i = 1; i < fs.eps_schedule.size(); ++i)
        if (!(fs.eps_schedule[i] < fs.eps_schedule[i - 1]))
            throw ConfigError("family config: eps schedule is not decreasing at position " +
                              std::to_string(i));

    if (const auto v = ini.get("family", "rule")) fs.rule = *v;
    if (fs.rule != "c21" && fs.rule != "c11")
        throw ConfigError("family config: rule must be c21|c11");
    fs.p_exponent = (fs.rule == "c21") ? (2.0 * fs.k - 2.0) / 3.0 : fs.k - 1.0;

    if (const auto v = ini.get("family", "n_complex")) fs.n_complex = std::stoi(*v);
    if (const auto v = ini.get("family", "resolution")) fs.resolution = std::stoi(*v);
    if (const auto v = ini.get("family", "interval_lo")) fs.interval_lo = std::stod(*v);
    if (const auto v = ini.get("family", "interval_hi")) fs.interval_hi = std::stod(*v);
    if (const auto v = ini.get("family", "even")) fs.even = (*v == "true" || *v == "1");

    if (fs.domain == DomainKind::Sphere && !fs.even)
        throw ConfigError(
            "family config: sphere families must set even = true (the moment"
            " compatibility condition requires an antipodally even profile)");

    // nonnegativity by grid scan, and evenness verification on the sphere
    const expr::Expr g = expr::Expr::parse(fs.g_text, fs.var_names());
    if (fs.domain == DomainKind::Interval) {
        for (int i = 0; i <= 2000; ++i) {
            const double x = fs.interval_lo + (fs.interval_hi - fs.interval_lo) * i / 2000.0;
            if (g.eval(&x) < 0)
                throw ConfigError("family config: g < 0 at x = " + std::to_string(x));
        }
    } else if (fs.domain == DomainKind::Torus) {
        const int d = 2 * fs.n_complex;
        Rng rng(7);
        double c[6];
        for (int s = 0; s < 20000; ++s) {
            for (int a = 0; a < d; ++a) c[a] = rng.uniform(0, 2 * M_PI);
            if (g.eval(c) < 0) throw ConfigError("family config: g < 0 on the torus");
        }
    } else {
        Rng rng(7);
        for (int s = 0; s < 20000; ++s) {
            double v[3];
            double norm = 0;
            for (double& x : v) {
                x = rng.normal();
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
            const double gp = g.eval(v);
            if (gp < 0) throw ConfigError("family config: g < 0 on the sphere");
            if (fs.even) {
                double w[3] = {-v[0], -v[1], -v[2]};
                if (std::abs(g.eval(w) - gp) > 1e-12 * std::max(1.0, std::abs(gp)))
                    throw ConfigError("family config: even = true but g is not antipodally even");
            }
        }
    }
    return fs;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace sklab::config
