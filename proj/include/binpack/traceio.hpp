#pragma once

#include <string>
#include <vector>

#include "binpack/engine.hpp"

namespace binpack {

// Fixed numeric formatting for CSV output: integers raw, reals with 9
// significant digits. Reruns of the same command must be byte-identical.
std::string format_real(double v);

// time,items,bins,gap_waste,true_waste,N_1..N_{B-1}
std::string levels_csv_timed(const std::vector<TraceSample>& samples, int capacity);

// item_index,bins,gap_waste,true_waste,N_1..N_{B-1}
std::string levels_csv_stream(const std::vector<TraceSample>& samples, int capacity);

// time,config_key,count (long format, one row per tracked configuration)
std::string configs_csv(const std::vector<TraceSample>& samples);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace binpack
