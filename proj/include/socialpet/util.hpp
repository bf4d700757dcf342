#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace socialpet {

// FNV-1a 64-bit. Used for feature hashing, seed mixing and split checksums.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Mixes extra values into an existing seed (order-sensitive).
std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

// Whitespace-delimited tokens; empty tokens never appear.
std::vector<std::string> whitespace_tokens(std::string_view s);
std::size_t whitespace_token_count(std::string_view s);

// Deterministic draw in [0, n). Uses mt19937_64 so sequences are identical
// across platforms (std::shuffle/uniform_int_distribution are not).
std::uint64_t draw_below(std::mt19937_64& gen, std::uint64_t n);

// Fisher-Yates selection of k distinct indices out of n, in sampling order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& gen);

// In-place Fisher-Yates shuffle with the deterministic draw above.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& gen) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(draw_below(gen, i));
    std::swap(items[i - 1], items[j]);
  }
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Write-to-temp-then-rename; safe when concurrent writers produce identical
// bytes (paired method runs sharing one manifest).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Fixed-precision decimal formatting (locale-independent).
std::string format_fixed(double value, int decimals);

}  // namespace socialpet
