#include "sklab/report_io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <cerrno>
#include <sys/stat.h>

namespace sklab::io {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Csv::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw IoError("csv row arity mismatch");
    rows_.push_back(cells);
}

std::string Csv::to_string() const {
    std::ostringstream out;
    for (size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
    return out.str();
}

void Csv::write(const std::string& path) const { write_atomic(path, to_string()); }

void Manifest::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

void Manifest::write(const std::string& path) const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    write_atomic(path, out.str());
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out << content;
        if (!out.good()) throw IoError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("rename failed: " + tmp + " -> " + path);
}

void ensure_dir(const std::string& path) {
    struct stat st{};
    if (stat(path.c_str(), &st) == 0) {
        if (!S_ISDIR(st.st_mode)) throw IoError("not a directory: " + path);
        return;
    }
    const auto slash = path.find_last_of('/');
    if (slash != std::string::npos && slash > 0) ensure_dir(path.substr(0, slash));
    if (mkdir(path.c_str(), 0755) != 0 && errno != EEXIST)
        throw IoError("cannot create directory: " + path);
}

std::string timestamp_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_field(const std::string& path, const FieldFile& field) {
    std::ostringstream out;
    out << "sklab-field 1\n";
    out << "kind = " << field.kind << "\n";
    out << "dim = " << field.dim << "\n";
    out << "resolution = " << field.resolution << "\n";
    out << "size = " << field.values.size() << "\n";
    for (long i = 0; i < field.values.size(); ++i) out << format_double(field.values(i)) << "\n";
    write_atomic(path, out.str());
}

FieldFile read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open field file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "sklab-field" || version != 1)
        throw ConfigError("field file: bad header in " + path);
    FieldFile f;
    long size = -1;
    std::string key, eq;
    for (int line = 0; line < 4; ++line) {
        in >> key >> eq;
        if (eq != "=") throw ConfigError("field file: malformed header line in " + path);
        if (key == "kind") in >> f.kind;
        else if (key == "dim") in >> f.dim;
        else if (key == "resolution") in >> f.resolution;
        else if (key == "size") in >> size;
        else throw ConfigError("field file: unknown header key '" + key + "'");
    }
    if (size < 0) throw ConfigError("field file: missing size in " + path);
    f.values.resize(size);
    for (long i = 0; i < size; ++i) {
        if (!(in >> f.values(i))) throw ConfigError("field file: truncated values in " + path);
    }
    return f;
}

}  // namespace sklab::io
