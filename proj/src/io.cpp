#include "simdm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace simdm {

std::string format_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void write_vector(std::ostream& os, const VectorXd& v) {
    os << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << format_sig(v[i], 17) << '\n';
}

void write_matrix(std::ostream& os, const MatrixXd& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << ' ';
            os << format_sig(m(r, c), 17);
        }
        os << '\n';
    }
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return f;
}

}  // namespace

void write_vector_file(const std::string& path, const VectorXd& v) {
    auto f = open_out(path);
    write_vector(f, v);
    if (!f) throw std::runtime_error("write failed: " + path);
}

void write_matrix_file(const std::string& path, const MatrixXd& m) {
    auto f = open_out(path);
    write_matrix(f, m);
    if (!f) throw std::runtime_error("write failed: " + path);
}

VectorXd read_vector(std::istream& is) {
    long n = 0;
    if (!(is >> n) || n < 1) throw std::runtime_error("vector file: bad length header");
    VectorXd v(n);
    for (long i = 0; i < n; ++i)
        if (!(is >> v[i])) throw std::runtime_error("vector file: truncated or non-numeric data");
    return v;
}

MatrixXd read_matrix(std::istream& is) {
    long rows = 0, cols = 0;
    if (!(is >> rows >> cols) || rows < 1 || cols < 1)
        throw std::runtime_error("matrix file: bad shape header");
    MatrixXd m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c)
            if (!(is >> m(r, c)))
                throw std::runtime_error("matrix file: truncated or non-numeric data");
    return m;
}

VectorXd read_vector_file(const std::string& path) {
    auto f = open_in(path);
    return read_vector(f);
}

MatrixXd read_matrix_file(const std::string& path) {
    auto f = open_in(path);
    return read_matrix(f);
}

std::string read_text_file(const std::string& path) {
    auto f = open_in(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace simdm
