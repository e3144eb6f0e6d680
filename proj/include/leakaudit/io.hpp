#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace leakaudit {

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

// Reads a JSONL file, one parsed object per non-empty line.
std::vector<nlohmann::json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& rows);

std::string iso8601_utc_now();

// Runs fn(0..n-1) on a bounded pool of `workers` threads. The first exception
// thrown by any call aborts the remaining work and is rethrown on the caller.
void parallel_indexed(size_t n, int workers, const std::function<void(size_t)>& fn);

} // namespace leakaudit
