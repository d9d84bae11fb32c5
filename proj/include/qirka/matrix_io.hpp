#pragma once

// Plain-text matrix format used for model import/export:
//
//   rows cols
//   a11 a12 ... a1c
//   ...
//
// Entries are written row-major with 17 significant digits. The reader
// accepts any whitespace layout after the header but reports the line of the
// first malformed or missing token.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qirka/model_core.hpp"

namespace qirka::io {

/// %.17g formatting, shared by the matrix writer and the CSV emitters.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_matrix(std::ostream& os, const Matrix& M) {
  os << M.rows() << ' ' << M.cols() << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(M(i, j));
    }
    os << '\n';
  }
}

/// `source` names the stream in error messages (usually the file path).
inline Matrix read_matrix(std::istream& is, const std::string& source = "<stream>") {
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::parse_error, source + ":" + std::to_string(line_no) + ": " + why,
                line_no);
  };

  // header
  long long rows = -1, cols = -1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> rows >> cols) || (hs >> extra)) fail("expected header 'rows cols'");
    break;
  }
  if (rows < 0 || cols < 0) {
    if (rows == -1) fail("missing header");
    fail("negative dimension in header");
  }

  Matrix M(rows, cols);
  const long long total = rows * cols;
  long long filled = 0;
  while (filled < total && std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (filled == total) fail("too many entries");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        fail("malformed number '" + tok + "'");
      }
      if (used != tok.size()) fail("malformed number '" + tok + "'");
      M(filled / cols, filled % cols) = v;
      ++filled;
    }
  }
  if (filled < total) {
    fail("truncated: expected " + std::to_string(total) + " entries, found " +
         std::to_string(filled));
  }
  // Only blank lines may follow.
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) fail("too many entries");
  }
  return M;
}

inline void save_matrix(const std::filesystem::path& path, const Matrix& M) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path.string() + " for writing");
  write_matrix(os, M);
}

inline Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  return read_matrix(is, path.string());
}

/// Writes A.txt, B.txt, C.txt, D.txt into `dir` (created if needed).
inline void save_model(const std::filesystem::path& dir, const StateSpaceModel& model) {
  std::filesystem::create_directories(dir);
  save_matrix(dir / "A.txt", model.A());
  save_matrix(dir / "B.txt", model.B());
  save_matrix(dir / "C.txt", model.C());
  save_matrix(dir / "D.txt", model.D());
}

inline StateSpaceModel load_model(const std::filesystem::path& dir) {
  return StateSpaceModel(load_matrix(dir / "A.txt"), load_matrix(dir / "B.txt"),
                         load_matrix(dir / "C.txt"), load_matrix(dir / "D.txt"));
}

}  // namespace qirka::io
