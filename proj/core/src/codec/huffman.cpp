#include "gebc/codec/huffman.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace gebc {
namespace {

constexpr unsigned kMaxCodeLength = 63;
constexpr std::size_t kMaxAlphabet = std::size_t{1} << 24;

struct Node {
  std::uint64_t weight;
  std::uint32_t id;  // creation order; breaks weight ties deterministically
};

struct HeavierFirst {
  bool operator()(const Node& a, const Node& b) const {
    return a.weight != b.weight ? a.weight > b.weight : a.id > b.id;
  }
};

}  // namespace

std::vector<std::uint8_t> huffman_code_lengths(std::span<const std::uint64_t> freqs) {
  const std::size_t n = freqs.size();
  std::vector<std::uint8_t> lengths(n, 0);
  std::vector<std::uint32_t> leaves;
  for (std::size_t s = 0; s < n; ++s) {
    if (freqs[s] > 0) leaves.push_back(static_cast<std::uint32_t>(s));
  }
  if (leaves.empty()) return lengths;
  if (leaves.size() == 1) {
    lengths[leaves[0]] = 1;
    return lengths;
  }

  // Nodes 0..L-1 are leaves; internal nodes are appended with parent links.
  std::vector<std::uint32_t> parent(2 * leaves.size() - 1, 0);
  std::priority_queue<Node, std::vector<Node>, HeavierFirst> heap;
  for (std::uint32_t i = 0; i < leaves.size(); ++i) heap.push({freqs[leaves[i]], i});
  std::uint32_t next = static_cast<std::uint32_t>(leaves.size());
  while (heap.size() > 1) {
    const Node a = heap.top();
    heap.pop();
    const Node b = heap.top();
    heap.pop();
    parent[a.id] = next;
    parent[b.id] = next;
    heap.push({a.weight + b.weight, next});
    ++next;
  }
  // Parents are created after children, so one reverse sweep yields depths.
  std::vector<std::uint32_t> depth(parent.size(), 0);
  for (std::size_t i = parent.size() - 1; i-- > 0;) depth[i] = depth[parent[i]] + 1;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (depth[i] > kMaxCodeLength) throw UsageError("Huffman code exceeds 63 bits");
    lengths[leaves[i]] = static_cast<std::uint8_t>(depth[i]);
  }
  return lengths;
}

std::vector<std::uint64_t> canonical_codes(std::span<const std::uint8_t> lengths) {
  std::vector<std::uint32_t> order;
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    if (lengths[s] > kMaxCodeLength) throw IntegrityError("code length above 63 bits");
    if (lengths[s]) order.push_back(static_cast<std::uint32_t>(s));
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return lengths[a] < lengths[b]; });
  std::vector<std::uint64_t> codes(lengths.size(), 0);
  std::uint64_t code = 0;
  unsigned prev_len = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const unsigned len = lengths[order[k]];
    code <<= (len - prev_len);
    prev_len = len;
    if (len < 64 && (code >> len) != 0) throw IntegrityError("code lengths are over-subscribed");
    codes[order[k]] = code++;
  }
  return codes;
}

HuffmanBlock entropy_encode(std::span<const std::int32_t> symbols) {
  HuffmanBlock block;
  block.symbol_count = symbols.size();
  if (symbols.empty()) return block;

  const auto [lo, hi] = std::minmax_element(symbols.begin(), symbols.end());
  const std::int64_t span = static_cast<std::int64_t>(*hi) - *lo + 1;
  if (static_cast<std::uint64_t>(span) > kMaxAlphabet) throw UsageError("symbol range too wide for Huffman table");
  block.min_symbol = *lo;

  std::vector<std::uint64_t> freqs(static_cast<std::size_t>(span), 0);
  for (auto s : symbols) ++freqs[static_cast<std::size_t>(static_cast<std::int64_t>(s) - *lo)];
  block.code_lengths = huffman_code_lengths(freqs);
  const auto codes = canonical_codes(block.code_lengths);

  BitWriter w;
  for (auto s : symbols) {
    const auto idx = static_cast<std::size_t>(static_cast<std::int64_t>(s) - block.min_symbol);
    w.code(codes[idx], block.code_lengths[idx]);
  }
  block.bit_count = w.bit_count();
  block.bits = w.take();
  return block;
}

std::vector<std::int32_t> entropy_decode(const HuffmanBlock& block) {
  std::vector<std::int32_t> out;
  if (block.bit_count == 0) return out;
  if (block.bits.size() < packed_size(block.bit_count)) throw IntegrityError("Huffman bitstream truncated");
  canonical_codes(block.code_lengths);  // Kraft check

  unsigned max_len = 0;
  std::vector<std::uint64_t> count(kMaxCodeLength + 1, 0);
  std::vector<std::uint32_t> sorted;
  for (std::size_t s = 0; s < block.code_lengths.size(); ++s) {
    const unsigned len = block.code_lengths[s];
    if (!len) continue;
    ++count[len];
    max_len = std::max(max_len, len);
    sorted.push_back(static_cast<std::uint32_t>(s));
  }
  if (sorted.empty()) throw IntegrityError("Huffman table is empty but the bitstream is not");
  std::stable_sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
    return block.code_lengths[a] < block.code_lengths[b];
  });

  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(block.bit_count, 1u << 26)));
  BitReader r(block.bits, block.bit_count);
  while (!r.exhausted()) {
    std::uint64_t code = 0, first = 0, index = 0;
    bool found = false;
    for (unsigned len = 1; len <= max_len; ++len) {
      code |= r.bit() ? 1u : 0u;
      const std::uint64_t cnt = count[len];
      if (code - first < cnt) {
        out.push_back(static_cast<std::int32_t>(block.min_symbol + static_cast<std::int64_t>(sorted[index + code - first])));
        found = true;
        break;
      }
      index += cnt;
      first = (first + cnt) << 1;
      code <<= 1;
    }
    if (!found) throw IntegrityError("invalid Huffman code in bitstream");
  }
  return out;
}

void write_huffman(ByteWriter& out, const HuffmanBlock& block) {
  out.i32(block.min_symbol);
  out.u32(static_cast<std::uint32_t>(block.code_lengths.size()));
  out.bytes(block.code_lengths);
  out.u64(block.bit_count);
  out.bytes(block.bits);
}

HuffmanBlock read_huffman(ByteReader& in) {
  HuffmanBlock block;
  block.min_symbol = in.i32();
  const std::uint32_t size = in.u32();
  if (size > kMaxAlphabet) throw IntegrityError("Huffman alphabet too large");
  const ByteView lengths = in.bytes(size);
  block.code_lengths.assign(lengths.begin(), lengths.end());
  block.bit_count = in.u64();
  if (block.bit_count > std::uint64_t{8} * in.remaining()) throw IntegrityError("Huffman bitstream truncated");
  const ByteView bits = in.bytes(packed_size(block.bit_count));
  block.bits.assign(bits.begin(), bits.end());
  if (static_cast<std::int64_t>(block.min_symbol) + size - 1 > std::numeric_limits<std::int32_t>::max()) {
    throw IntegrityError("Huffman symbol range overflows");
  }
  return block;
}

}  // namespace gebc
