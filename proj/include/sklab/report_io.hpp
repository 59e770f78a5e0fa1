#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sklab/numerics.hpp"

namespace sklab::io {

std::string format_double(double v);  // %.17g, round-trip exact

/// CSV table with provenance columns; written atomically (temp + rename).
class Csv {
public:
    explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {}
    void add_row(const std::vector<std::string>& cells);
    std::string to_string() const;
    void write(const std::string& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

/// Key-value run manifest, one `key = value` per line, atomic write.
class Manifest {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value) { set(key, format_double(value)); }
    void set(const std::string& key, long value) { set(key, std::to_string(value)); }
    void write(const std::string& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

void write_atomic(const std::string& path, const std::string& content);
void ensure_dir(const std::string& path);
std::string timestamp_utc();

/// Node-value table with a self-describing header. kind is one of
/// torus (dim = complex dimension), sphere2 (dim = 2, resolution = n_theta),
/// sphere3 (dim = 3, resolution = n_psi); node order is the owning grid's
/// row-major order.
struct FieldFile {
    std::string kind;
    int dim = 0;
    int resolution = 0;
    Eigen::VectorXd values;
};

void write_field(const std::string& path, const FieldFile& field);
FieldFile read_field(const std::string& path);

}  // namespace sklab::io
