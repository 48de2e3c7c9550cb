#include "asymalloc/io.hpp"

#include "asymalloc/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <memory>
#include <sstream>

namespace asymalloc::io {

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw NumericError("cannot format number");
  return std::string(buf.data(), end);
}

Json matrix_to_json(const Matrix& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, std::string_view field) {
  const std::string name(field);
  if (!j.is_array()) throw DataError("field '" + name + "' must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix M;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw DataError("field '" + name + "' row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      M.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError("field '" + name + "' is ragged at row " + std::to_string(i));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw DataError("field '" + name + "' has a non-numeric entry");
      M(i, c) = v.get<double>();
    }
  }
  if (rows == 0) M.resize(0, 0);
  return M;
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const Json& j, std::string_view field) {
  const std::string name(field);
  if (!j.is_array()) throw DataError("field '" + name + "' must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError("field '" + name + "' has a non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json model_to_json(const FactorModel& model) {
  Json j;
  j["v"] = kSchemaVersion;
  j["m"] = model.m();
  j["n"] = model.n();
  j["a"] = vector_to_json(model.a());
  j["A"] = matrix_to_json(model.A());
  j["B"] = matrix_to_json(model.B());
  j["Sigma"] = matrix_to_json(model.Sigma());
  j["Lambda"] = matrix_to_json(model.Lambda());
  return j;
}

namespace {

const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("model JSON is missing field '") + key + "'");
  return j.at(key);
}

// An empty JSON array cannot carry a column count, so restore it from (rows, cols).
Matrix shaped(const Json& j, const char* key, Eigen::Index rows, Eigen::Index cols) {
  Matrix M = matrix_from_json(require(j, key), key);
  if (M.size() == 0) M.resize(rows, cols);
  return M;
}

}  // namespace

FactorModel model_from_json(const Json& j) {
  if (!j.is_object()) throw DataError("model JSON must be an object");
  const Json& v = require(j, "v");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw DataError("unsupported model schema version (expected v=1)");
  }
  const Json& mj = require(j, "m");
  const Json& nj = require(j, "n");
  if (!mj.is_number_integer() || !nj.is_number_integer() || mj.get<long>() < 0 || nj.get<long>() < 0) {
    throw DataError("model fields 'm' and 'n' must be nonnegative integers");
  }
  const auto m = static_cast<Eigen::Index>(mj.get<long>());
  const auto n = static_cast<Eigen::Index>(nj.get<long>());
  ModelFields f;
  f.a = vector_from_json(require(j, "a"), "a");
  f.A = shaped(j, "A", m, n);
  f.B = shaped(j, "B", n, n);
  f.Sigma = shaped(j, "Sigma", m, m + n);
  f.Lambda = shaped(j, "Lambda", n, m + n);
  if (f.a.size() != m || f.B.rows() != n) {
    throw DataError("model JSON dimensions disagree with declared m=" + std::to_string(m) +
                    ", n=" + std::to_string(n));
  }
  return validate_model(std::move(f));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

Json read_json(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

FactorModel read_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void write_model(const std::filesystem::path& path, const FactorModel& model) {
  write_json(path, model_to_json(model));
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw NumericError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xF]);
  }
  return hex;
}

}  // namespace asymalloc::io
