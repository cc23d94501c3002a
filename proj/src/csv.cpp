#include "regenstab/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace regenstab {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string matrix_csv(const Eigen::MatrixXd& mat, const std::vector<std::string>& labels) {
    std::vector<std::string> header{"row"};
    for (Eigen::Index j = 0; j < mat.cols(); ++j) header.push_back(labels[static_cast<std::size_t>(j)]);
    std::string out = csv_row(header);
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        std::vector<std::string> row{labels[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < mat.cols(); ++j) row.push_back(format_double(mat(i, j)));
        out += csv_row(row);
    }
    return out;
}

}  // namespace regenstab
