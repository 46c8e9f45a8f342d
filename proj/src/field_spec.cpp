#include "sew/field_spec.hpp"

#include <cctype>
#include <charconv>
#include <numbers>
#include <sstream>

namespace sew {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_top(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '{') ++depth;
        if (c == '}') --depth;
        if (depth < 0) throw SpecError("unbalanced braces in field spec");
        if (c == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (depth != 0) throw SpecError("unbalanced braces in field spec");
    out.push_back(cur);
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_spec_map(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '{' || s.back() != '}') throw SpecError("expected {k:v,...}, got '" + s + "'");
    std::vector<std::pair<std::string, std::string>> out;
    const std::string body = trim(s.substr(1, s.size() - 2));
    if (body.empty()) return out;
    for (const std::string& item : split_top(body, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw SpecError("expected key:value, got '" + trim(item) + "'");
        const std::string k = trim(item.substr(0, colon)), v = trim(item.substr(colon + 1));
        if (k.empty() || v.empty()) throw SpecError("empty key or value in '" + trim(item) + "'");
        out.emplace_back(k, v);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> split_spec_entries(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const std::string& raw : split_top(text, ';')) {
        const std::string part = trim(raw);
        if (part.empty()) continue;
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw SpecError("expected key=value, got '" + part + "'");
        out.emplace_back(trim(part.substr(0, eq)), trim(part.substr(eq + 1)));
    }
    return out;
}

std::string format_number(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_number(const std::string& token) {
    std::string t = trim(token);
    if (t.empty()) throw SpecError("empty number");
    double divisor = 1.0;
    if (const auto slash = t.find('/'); slash != std::string::npos) {
        divisor = parse_number(t.substr(slash + 1));
        t = trim(t.substr(0, slash));
        if (divisor == 0.0) throw SpecError("division by zero in '" + token + "'");
    }
    double factor = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
        factor = std::numbers::pi;
        t = trim(t.substr(0, t.size() - 2));
        if (!t.empty() && t.back() == '*') t.pop_back();
        if (t.empty() || t == "+") t = "1";
        if (t == "-") t = "-1";
    }
    double v = 0.0;
    const char* b = t.data();
    const char* e = t.data() + t.size();
    if (*b == '+') ++b;
    const auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) throw SpecError("not a number: '" + token + "'");
    return v * factor / divisor;
}

FieldSpec parse_field_spec(const std::string& text) {
    FieldSpec spec;
    bool have_name = false;
    for (const auto& [key, value] : split_spec_entries(text)) {
        if (key == "name") {
            if (value.empty()) throw SpecError("empty field name");
            spec.name = value;
            have_name = true;
        } else if (key == "params") {
            for (const auto& [k, v] : parse_spec_map(value)) spec.params[k] = parse_number(v);
        } else if (key == "domain") {
            for (const auto& [k, v] : parse_spec_map(value)) {
                if (k == "kind")
                    spec.domain_kind = v;
                else
                    spec.domain_params[k] = parse_number(v);
            }
            if (spec.domain_kind.empty()) throw SpecError("domain needs a kind");
        } else {
            throw SpecError("unknown spec key '" + key + "'");
        }
    }
    if (!have_name) throw SpecError("field spec has no name");
    return spec;
}

std::string FieldSpec::canonical() const {
    std::string s = "name=" + name + "; params={";
    bool first = true;
    for (const auto& [k, v] : params) {
        s += (first ? "" : ",") + k + ":" + format_number(v);
        first = false;
    }
    s += "}";
    if (!domain_kind.empty()) {
        s += "; domain={kind:" + domain_kind;
        for (const auto& [k, v] : domain_params) s += "," + k + ":" + format_number(v);
        s += "}";
    }
    return s;
}

std::optional<Domain> spec_domain(const FieldSpec& spec) {
    if (spec.domain_kind.empty()) return std::nullopt;
    auto get = [&](const char* k, std::optional<double> fallback = std::nullopt) {
        auto it = spec.domain_params.find(k);
        if (it != spec.domain_params.end()) return it->second;
        if (fallback) return *fallback;
        throw SpecError(std::string("domain '") + spec.domain_kind + "' needs '" + k + "'");
    };
    const Point c{get("cx", 0.0), get("cy", 0.0)};
    if (spec.domain_kind == "disk") {
        const double r = get("r");
        if (!(r > 0.0)) throw SpecError("disk radius must be positive");
        return Domain::disk(c, r);
    }
    if (spec.domain_kind == "annulus") {
        const double a = get("r_in"), b = get("r_out");
        if (!(a >= 0.0 && a < b)) throw SpecError("annulus needs 0 <= r_in < r_out");
        return Domain::annulus(c, a, b);
    }
    if (spec.domain_kind == "torus" || spec.domain_kind == "periodic-rectangle") {
        const double two_pi = 2 * std::numbers::pi;
        const double lx = get("lx", two_pi), ly = get("ly", two_pi);
        if (!(lx > 0.0 && ly > 0.0)) throw SpecError("periodic widths must be positive");
        return Domain::periodic_rectangle(lx, ly, {get("x0", 0.0), get("y0", 0.0)});
    }
    throw SpecError("unsupported domain kind '" + spec.domain_kind + "'");
}

}  // namespace sew
