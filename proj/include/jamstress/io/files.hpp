#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "jamstress/error.hpp"

namespace jamstress {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) throw Error("read failed: " + path.string());
  return s.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error("write failed: " + path.string());
}

} // namespace jamstress
