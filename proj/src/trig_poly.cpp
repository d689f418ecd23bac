#include "chanflow/trig_poly.hpp"
#include "chanflow/errors.hpp"

#include <cmath>
#include <cstdio>
#include <regex>

namespace chanflow {

bool TrigPoly::is_constant(double tol) const {
    for (double v : a)
        if (std::abs(v) > tol) return false;
    for (double v : b)
        if (std::abs(v) > tol) return false;
    return true;
}

double TrigPoly::derivative(double theta, int p) const {
    double r = (p == 0) ? a0 : 0.0;
    for (int k = 1; k <= order(); ++k) {
        // d^p/dθ^p of cos(kθ) = k^p cos(kθ + pπ/2)
        const double kp = std::pow(static_cast<double>(k), p);
        const double ph = k * theta + p * M_PI / 2.0;
        r += kp * (coef_cos(k) * std::cos(ph) + coef_sin(k) * std::sin(ph));
    }
    return r;
}

TrigPoly TrigPoly::parse(const std::string& expr) {
    std::string s;
    for (char ch : expr)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw ConfigError("empty trigonometric expression");

    TrigPoly f;
    auto add = [&f](bool is_cos, int k, double c) {
        auto& v = is_cos ? f.a : f.b;
        if (static_cast<int>(v.size()) < k) v.resize(static_cast<std::size_t>(k), 0.0);
        v[k - 1] += c;
    };

    static const std::regex term(R"(([+-]?)((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?(\*?)(?:(cos|sin)(?:\(?(\d*)\)?))?)");
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::smatch m;
        auto begin = s.cbegin() + static_cast<long>(pos);
        if (!std::regex_search(begin, s.cend(), m, term, std::regex_constants::match_continuous) || m.length(0) == 0)
            throw ConfigError("cannot parse trigonometric expression near '" + s.substr(pos) + "'");
        const bool neg = m[1].str() == "-";
        const bool has_num = m[2].matched;
        const bool has_fn = m[4].matched;
        if (!has_num && !has_fn) throw ConfigError("dangling sign in trigonometric expression '" + expr + "'");
        if (pos > 0 && m[1].str().empty()) throw ConfigError("missing operator in trigonometric expression '" + expr + "'");
        if (m[3].length() && (!has_num || !has_fn)) throw ConfigError("misplaced '*' in '" + expr + "'");
        double c = has_num ? std::stod(m[2].str()) : 1.0;
        if (neg) c = -c;
        if (has_fn) {
            const int k = m[5].str().empty() ? 1 : std::stoi(m[5].str());
            if (k < 1) throw ConfigError("harmonic index must be >= 1 in '" + expr + "'");
            add(m[4].str() == "cos", k, c);
        } else {
            f.a0 += c;
        }
        pos += static_cast<std::size_t>(m.length(0));
    }
    return f;
}

TrigPoly TrigPoly::from_coeffs(const std::vector<double>& c) {
    TrigPoly f;
    if (c.empty()) throw ConfigError("trig_coeffs must not be empty");
    f.a0 = c[0];
    for (std::size_t i = 1; i < c.size(); ++i) {
        const std::size_t k = (i + 1) / 2;
        auto& v = (i % 2) ? f.a : f.b;
        if (v.size() < k) v.resize(k, 0.0);
        v[k - 1] = c[i];
    }
    return f;
}

std::string TrigPoly::to_string() const {
    std::string out;
    char buf[64];
    auto emit = [&](double c, const char* fn, int k) {
        if (c == 0.0) return;
        if (fn)
            std::snprintf(buf, sizeof buf, "%+.17g*%s%d", c, fn, k);
        else
            std::snprintf(buf, sizeof buf, "%+.17g", c);
        out += buf;
    };
    emit(a0, nullptr, 0);
    for (int k = 1; k <= order(); ++k) {
        emit(coef_cos(k), "cos", k);
        emit(coef_sin(k), "sin", k);
    }
    if (out.empty()) out = "0";
    if (out[0] == '+') out.erase(0, 1);
    return out;
}

} // namespace chanflow
