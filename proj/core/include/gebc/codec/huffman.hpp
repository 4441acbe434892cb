#pragma once

// Canonical Huffman coding of signed quantization bins.

#include <cstdint>
#include <span>
#include <vector>

#include "gebc/bytes.hpp"

namespace gebc {

struct HuffmanBlock {
  std::int32_t min_symbol = 0;
  std::vector<std::uint8_t> code_lengths;  // one per symbol in [min_symbol, min_symbol + size)
  std::uint64_t bit_count = 0;
  Bytes bits;                              // LSB-first packed codes
  std::uint64_t symbol_count = 0;          // not serialized; recovered by decoding

  double mean_code_length() const {
    return symbol_count ? static_cast<double>(bit_count) / static_cast<double>(symbol_count) : 0.0;
  }
};

// Code lengths for the given frequencies (0 for absent symbols). A lone
// symbol gets a 1-bit code. Tie-breaking is deterministic.
std::vector<std::uint8_t> huffman_code_lengths(std::span<const std::uint64_t> freqs);

// Canonical code words for a set of lengths: shorter codes first, equal
// lengths ordered by symbol. Throws IntegrityError when the lengths violate
// the Kraft inequality.
std::vector<std::uint64_t> canonical_codes(std::span<const std::uint8_t> lengths);

HuffmanBlock entropy_encode(std::span<const std::int32_t> symbols);
std::vector<std::int32_t> entropy_decode(const HuffmanBlock& block);

// min i32, alphabet size u32, code lengths u8[size], bit count u64, packed bits.
void write_huffman(ByteWriter& out, const HuffmanBlock& block);
HuffmanBlock read_huffman(ByteReader& in);

}  // namespace gebc
