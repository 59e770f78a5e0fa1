#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sklab/expr.hpp"

namespace sklab::config {

/// Line-oriented `key = value` sections ([section] headers, # comments).
struct Ini {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Ini parse_file(const std::string& path);
    static Ini parse_text(const std::string& text);
    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    /// Canonical text (sorted sections/keys): the digest input.
    std::string normalized() const;
};

enum class DomainKind { Interval, Torus, Sphere };

/// A degenerate family: nonnegative base profile g, exponent rule, and an
/// eps schedule. f_eps = (g + eps)^{(2k-2)/3} under the C21 rule,
/// (g + eps)^{k-1} under the C11 rule.
struct FamilySpec {
    DomainKind domain = DomainKind::Torus;
    int n_complex = 1;        // torus only
    int resolution = 128;     // per-axis (torus), n_theta (sphere), points (interval)
    double interval_lo = 0.0, interval_hi = 1.0;
    std::string g_text;
    bool even = false;        // required (and verified) for sphere sweeps
    std::string rule = "c21";
    std::vector<double> eps_schedule;
    int k = 2;
    double p_exponent = 0.0;  // filled by validation from k and rule

    std::vector<std::string> var_names() const;
};

/// Parses "a:b:decade" (geometric decade steps from a down to b) or a comma
/// list; validation rejects non-decreasing schedules.
std::vector<double> parse_eps_schedule(const std::string& text);

/// Resolves defaults, checks the invariants (decreasing schedule, evenness
/// for sphere families, nonnegativity of g by grid scan), and fills the
/// exponent. Throws ConfigError naming the offending field.
FamilySpec validate_family(const Ini& ini);

std::uint64_t fnv1a64(const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace sklab::config
