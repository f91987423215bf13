#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace desksmt {

using Tokens = std::vector<std::string>;

// --- strings --------------------------------------------------------------

Tokens split_ws(std::string_view s);
std::vector<std::string> split_on(std::string_view s, std::string_view sep);
std::string join(const Tokens& toks, std::string_view sep = " ");
std::string_view trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

// Shortest "%g"-style text with `digits` significant digits.
std::string format_g(double v, int digits = 6);

// Strict parses; throw DataError mentioning `what` on failure.
double parse_double(std::string_view s, std::string_view what = "number");
long long parse_int(std::string_view s, std::string_view what = "integer");

// --- UTF-8 ----------------------------------------------------------------

// Decodes `s`; on invalid input throws DataError naming the byte offset.
std::u32string utf8_decode(std::string_view s);
std::string utf8_encode(char32_t cp);
std::string utf8_encode(std::u32string_view cps);

// --- files ----------------------------------------------------------------

std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// FNV-1a, 64 bit. Used for config hashes in manifests.
std::uint64_t fnv1a(std::string_view s);
std::string hex64(std::uint64_t v);

// --- parallelism ----------------------------------------------------------

// Splits [0, n) into fixed-size shards and runs fn(shard, begin, end) on up
// to `jobs` threads. Shard boundaries depend only on n and shard_size, so a
// caller that reduces per-shard results in shard order gets the same answer
// for any job count.
void for_each_shard(std::size_t n, std::size_t shard_size, int jobs,
                    const std::function<void(std::size_t, std::size_t,
                                             std::size_t)>& fn);

inline std::size_t shard_count(std::size_t n, std::size_t shard_size) {
  return (n + shard_size - 1) / shard_size;
}

}  // namespace desksmt
