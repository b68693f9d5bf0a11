#pragma once

#include <iosfwd>
#include <string>

#include "simdm/predictor.hpp"

namespace simdm {

// Text layout: first line "n" for vectors or "rows cols" for matrices, then
// whitespace-separated decimals written with 17 significant digits.
void write_vector(std::ostream& os, const VectorXd& v);
void write_matrix(std::ostream& os, const MatrixXd& m);
void write_vector_file(const std::string& path, const VectorXd& v);
void write_matrix_file(const std::string& path, const MatrixXd& m);

VectorXd read_vector(std::istream& is);
MatrixXd read_matrix(std::istream& is);
VectorXd read_vector_file(const std::string& path);
MatrixXd read_matrix_file(const std::string& path);

// printf %.*g with the given significant digits; CSV uses 9, dumps use 17.
std::string format_sig(double v, int digits);

std::string read_text_file(const std::string& path);

}  // namespace simdm
