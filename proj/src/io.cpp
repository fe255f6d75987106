#include "eslope/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "eslope/errors.hpp"

namespace eslope::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_in(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    return in;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

double parse_double(std::string_view field, const std::string& name, std::size_t line)
{
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() &&
           (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw InputError(name + ":" + std::to_string(line) + ": not a number: '" +
                         std::string(field) + "'");
    }
    return value;
}

const char* truth_header = "component,index,value";

} // namespace

std::string format_double(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& M)
{
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

void write_matrix_csv(const fs::path& path, const Matrix& M)
{
    auto out = open_out(path);
    write_matrix_csv(out, M);
}

Matrix read_matrix_csv(std::istream& in, const std::string& name)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        for (;;) {
            const auto comma = rest.find(',');
            row.push_back(parse_double(rest.substr(0, comma), name, lineno));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw InputError(name + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(rows.front().size()) + " fields, found " +
                             std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw InputError(name + ": no data");
    }
    Matrix M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    if (!M.allFinite()) {
        throw InputError(name + ": non-finite value");
    }
    return M;
}

Matrix read_matrix_csv(const fs::path& path)
{
    auto in = open_in(path);
    return read_matrix_csv(in, path.string());
}

Vector read_vector_csv(const fs::path& path)
{
    const Matrix M = read_matrix_csv(path);
    if (M.cols() == 1) {
        return M.col(0);
    }
    if (M.rows() == 1) {
        return M.row(0).transpose();
    }
    throw InputError(path.string() + ": expected a single column");
}

void write_vector_csv(const fs::path& path, const Vector& v)
{
    write_matrix_csv(path, Matrix(v));
}

bool columns_unit_norm(const Matrix& X)
{
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        if (std::abs(X.col(j).norm() - 1.0) > 1e-10) {
            return false;
        }
    }
    return true;
}

void save_dataset(const fs::path& dir, const Dataset& data, const json& extra)
{
    fs::create_directories(dir);
    write_matrix_csv(dir / "X.csv", data.X());
    write_vector_csv(dir / "y.csv", data.y());

    json manifest = extra;
    manifest["schema"] = kDatasetSchema;
    manifest["version"] = kDatasetSchemaVersion;
    manifest["n"] = data.n();
    manifest["p"] = data.p();
    manifest["column_normalized"] = data.column_normalized();
    manifest["files"] = {{"X", "X.csv"}, {"y", "y.csv"}};

    if (const auto& truth = data.truth()) {
        auto out = open_out(dir / "truth.csv");
        out << truth_header << '\n';
        for (Eigen::Index j = 0; j < truth->beta.size(); ++j) {
            out << "beta," << j + 1 << ',' << format_double(truth->beta[j]) << '\n';
        }
        for (Eigen::Index i = 0; i < truth->mu.size(); ++i) {
            out << "mu," << i + 1 << ',' << format_double(truth->mu[i]) << '\n';
        }
        for (auto i : truth->support) {
            out << "support," << i + 1 << ",1\n";
        }
        manifest["files"]["truth"] = "truth.csv";
    }
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
}

json load_manifest(const fs::path& dir)
{
    auto in = open_in(dir / "manifest.json");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw InputError("manifest.json: " + std::string(e.what()));
    }
    if (manifest.value("schema", std::string{}) != kDatasetSchema) {
        throw InputError("manifest.json: schema is not " + std::string(kDatasetSchema));
    }
    if (manifest.value("version", 0) != kDatasetSchemaVersion) {
        throw InputError("manifest.json: unsupported schema version");
    }
    return manifest;
}

Dataset load_dataset(const fs::path& dir)
{
    const json manifest = load_manifest(dir);
    const auto& files = manifest.at("files");
    Matrix X = read_matrix_csv(dir / files.at("X").get<std::string>());
    Vector y = read_vector_csv(dir / files.at("y").get<std::string>());
    const auto n = manifest.at("n").get<std::size_t>();
    const auto p = manifest.at("p").get<std::size_t>();
    if (static_cast<std::size_t>(X.rows()) != n || static_cast<std::size_t>(X.cols()) != p ||
        static_cast<std::size_t>(y.size()) != n) {
        throw InputError("dataset files do not match the manifest shape");
    }

    std::optional<GroundTruth> truth;
    if (files.contains("truth")) {
        const auto path = dir / files.at("truth").get<std::string>();
        auto in = open_in(path);
        std::string line;
        if (!std::getline(in, line) || line.rfind(truth_header, 0) != 0) {
            throw InputError(path.string() + ": missing header");
        }
        GroundTruth t{Vector::Zero(static_cast<Eigen::Index>(p)),
                      Vector::Zero(static_cast<Eigen::Index>(n)), {}};
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) {
                continue;
            }
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos) {
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed");
            }
            const std::string kind = line.substr(0, c1);
            const auto index = static_cast<std::size_t>(
                parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1), path.string(), lineno));
            const double value = parse_double(std::string_view(line).substr(c2 + 1), path.string(), lineno);
            const std::size_t limit = kind == "beta" ? p : n;
            if (index < 1 || index > limit) {
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": index out of range");
            }
            if (kind == "beta") {
                t.beta[static_cast<Eigen::Index>(index - 1)] = value;
            } else if (kind == "mu") {
                t.mu[static_cast<Eigen::Index>(index - 1)] = value;
            } else if (kind == "support") {
                t.support.push_back(index - 1);
            } else {
                throw InputError(path.string() + ":" + std::to_string(lineno) + ": unknown component");
            }
        }
        truth = std::move(t);
    }
    return Dataset(std::move(X), std::move(y), manifest.at("column_normalized").get<bool>(),
                   std::move(truth));
}

Dataset load_xy(const fs::path& x_path, const fs::path& y_path)
{
    Matrix X = read_matrix_csv(x_path);
    Vector y = read_vector_csv(y_path);
    const bool normalized = columns_unit_norm(X);
    return Dataset(std::move(X), std::move(y), normalized);
}

} // namespace eslope::io
