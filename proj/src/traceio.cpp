#include "binpack/traceio.hpp"

#include <cstdio>
#include <fstream>

#include "binpack/errors.hpp"

namespace binpack {

std::string format_real(double v) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%.9g", v);
  return buffer;
}

namespace {

std::string levels_header(const char* index_col, int capacity) {
  std::string header = index_col;
  for (int h = 1; h < capacity; ++h) header += ",N_" + std::to_string(h);
  header += '\n';
  return header;
}

void append_level_counts(std::string& out, const TraceSample& s) {
  for (int64_t n : s.level_counts) {
    out += ',';
    out += std::to_string(n);
  }
  out += '\n';
}

}  // namespace

std::string levels_csv_timed(const std::vector<TraceSample>& samples, int capacity) {
  std::string out = levels_header("time,items,bins,gap_waste,true_waste", capacity);
  for (const auto& s : samples) {
    out += format_real(s.time);
    out += ',' + std::to_string(s.item_count);
    out += ',' + std::to_string(s.bin_count);
    out += ',' + std::to_string(s.gap_waste);
    out += ',' + std::to_string(s.true_waste);
    append_level_counts(out, s);
  }
  return out;
}

std::string levels_csv_stream(const std::vector<TraceSample>& samples, int capacity) {
  std::string out = levels_header("item_index,bins,gap_waste,true_waste", capacity);
  for (const auto& s : samples) {
    out += std::to_string(s.item_index);
    out += ',' + std::to_string(s.bin_count);
    out += ',' + std::to_string(s.gap_waste);
    out += ',' + std::to_string(s.true_waste);
    append_level_counts(out, s);
  }
  return out;
}

std::string configs_csv(const std::vector<TraceSample>& samples) {
  std::string out = "time,config_key,count\n";
  for (const auto& s : samples) {
    for (const auto& [key, count] : s.top_configs) {
      out += format_real(s.time);
      out += ',';
      out += key;
      out += ',' + std::to_string(count) + '\n';
    }
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << content;
  if (!out) throw ValidationError("failed writing " + path);
}

}  // namespace binpack
