#include "mbnla/record_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <vector>

#include "mbnla/errors.hpp"

namespace mbnla {

namespace {

constexpr uint64_t kFnvOffset = 14695981039346656037ull;
constexpr uint64_t kFnvPrime = 1099511628211ull;

uint64_t fnv1a(const unsigned char* data, size_t len, uint64_t h) {
  for (size_t i = 0; i < len; ++i) {
    h ^= data[i];
    h *= kFnvPrime;
  }
  return h;
}

void put_u32(unsigned char* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = (v >> (8 * i)) & 0xFF;
}
void put_u64(unsigned char* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = (v >> (8 * i)) & 0xFF;
}
void put_f64(unsigned char* p, double v) {
  put_u64(p, std::bit_cast<uint64_t>(v));
}
uint32_t get_u32(const unsigned char* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
  return v;
}
uint64_t get_u64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
  return v;
}
double get_f64(const unsigned char* p) {
  return std::bit_cast<double>(get_u64(p));
}

void encode_header(unsigned char header[kRecordHeaderSize],
                   const RecordMeta& meta, uint64_t shots,
                   uint64_t payload_digest) {
  std::memcpy(header, "MBNL", 4);
  put_u32(header + 4, kRecordVersion);
  put_u32(header + 8, meta.convention);
  put_u32(header + 12, 0);
  put_u64(header + 16, meta.seed);
  put_u64(header + 24, meta.state_digest);
  put_u64(header + 32, shots);
  put_f64(header + 40, meta.gain);
  put_u64(header + 48, payload_digest);
}

// 25 bytes per shot, appended to the running payload digest.
uint64_t encode_shots(const MeasurementRecord& rec,
                      std::vector<unsigned char>& buf, uint64_t digest) {
  const uint64_t n = rec.size();
  buf.resize(n * kRecordShotSize);
  for (uint64_t i = 0; i < n; ++i) {
    unsigned char* p = buf.data() + i * kRecordShotSize;
    p[0] = rec.alice_quad[i];
    put_f64(p + 1, rec.alice[i]);
    put_f64(p + 9, rec.bob_x[i]);
    put_f64(p + 17, rec.bob_p[i]);
  }
  return fnv1a(buf.data(), buf.size(), digest);
}

[[noreturn]] void fail_io(const std::string& what, const std::string& path) {
  throw io_error(what + ": " + path);
}

}  // namespace

RecordWriter::RecordWriter(const std::string& path, const RecordMeta& meta)
    : out_(path, std::ios::binary | std::ios::trunc),
      path_(path),
      meta_(meta),
      digest_(kFnvOffset) {
  if (!out_) fail_io("cannot open record file for writing", path);
  unsigned char header[kRecordHeaderSize];
  encode_header(header, meta_, 0, 0);
  out_.write(reinterpret_cast<const char*>(header), sizeof(header));
  if (!out_) fail_io("cannot write record header", path);
}

RecordWriter::~RecordWriter() {
  if (!closed_) {
    try {
      close();
    } catch (...) {
      // destructor must not throw; the file stays truncated/invalid
    }
  }
}

void RecordWriter::append(const MeasurementRecord& chunk) {
  if (closed_) throw io_error("record writer already closed: " + path_);
  std::vector<unsigned char> buf;
  digest_ = encode_shots(chunk, buf, digest_);
  out_.write(reinterpret_cast<const char*>(buf.data()),
             std::streamsize(buf.size()));
  if (!out_) fail_io("short write to record file", path_);
  shots_ += chunk.size();
}

void RecordWriter::close() {
  if (closed_) return;
  closed_ = true;
  unsigned char header[kRecordHeaderSize];
  encode_header(header, meta_, shots_, digest_);
  out_.seekp(0);
  out_.write(reinterpret_cast<const char*>(header), sizeof(header));
  out_.flush();
  if (!out_) fail_io("cannot finalize record header", path_);
  out_.close();
}

void write_record(const MeasurementRecord& record, const std::string& path) {
  RecordWriter writer(path, record.meta);
  writer.append(record);
  writer.close();
}

RecordMeta read_record_meta(const std::string& path, uint64_t* shot_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open record file", path);
  unsigned char header[kRecordHeaderSize];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) fail_io("record file shorter than its header", path);
  if (std::memcmp(header, "MBNL", 4) != 0) {
    fail_io("not a record file (bad magic)", path);
  }
  const uint32_t version = get_u32(header + 4);
  if (version != kRecordVersion) {
    std::ostringstream msg;
    msg << "unsupported record version " << version;
    fail_io(msg.str(), path);
  }
  RecordMeta meta;
  meta.convention = get_u32(header + 8);
  meta.seed = get_u64(header + 16);
  meta.state_digest = get_u64(header + 24);
  meta.gain = get_f64(header + 40);
  if (shot_count) *shot_count = get_u64(header + 32);
  {
    std::ostringstream label;
    label << "record:" << std::hex << meta.state_digest;
    meta.state_label = label.str();
  }
  return meta;
}

MeasurementRecord read_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open record file", path);
  unsigned char header[kRecordHeaderSize];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || std::memcmp(header, "MBNL", 4) != 0) {
    fail_io("not a record file (bad magic)", path);
  }
  if (get_u32(header + 4) != kRecordVersion) {
    fail_io("unsupported record version", path);
  }

  MeasurementRecord rec;
  rec.meta.convention = get_u32(header + 8);
  rec.meta.seed = get_u64(header + 16);
  rec.meta.state_digest = get_u64(header + 24);
  rec.meta.gain = get_f64(header + 40);
  {
    std::ostringstream label;
    label << "record:" << std::hex << rec.meta.state_digest;
    rec.meta.state_label = label.str();
  }
  const uint64_t n = get_u64(header + 32);
  const uint64_t stored_digest = get_u64(header + 48);
  rec.meta.n_requested = n;

  rec.alice_quad.resize(n);
  rec.alice.resize(n);
  rec.bob_x.resize(n);
  rec.bob_p.resize(n);

  constexpr uint64_t kChunkShots = 1 << 20;
  std::vector<unsigned char> buf;
  uint64_t digest = kFnvOffset;
  for (uint64_t start = 0; start < n; start += kChunkShots) {
    const uint64_t count = std::min(kChunkShots, n - start);
    buf.resize(count * kRecordShotSize);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (!in) fail_io("record payload shorter than its header claims", path);
    digest = fnv1a(buf.data(), buf.size(), digest);
    for (uint64_t i = 0; i < count; ++i) {
      const unsigned char* p = buf.data() + i * kRecordShotSize;
      rec.alice_quad[start + i] = p[0];
      rec.alice[start + i] = get_f64(p + 1);
      rec.bob_x[start + i] = get_f64(p + 9);
      rec.bob_p[start + i] = get_f64(p + 17);
    }
  }
  if (in.peek() != EOF) fail_io("trailing bytes after record payload", path);
  if (digest != stored_digest) {
    fail_io("record payload digest mismatch (corrupt file)", path);
  }
  return rec;
}

void write_record_csv(const MeasurementRecord& record,
                      const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail_io("cannot open CSV file for writing", path);
  std::fputs("index,alice_quad,alice_value,bob_x,bob_p\n", f);
  const uint64_t n = record.size();
  for (uint64_t i = 0; i < n; ++i) {
    std::fprintf(f, "%llu,%c,%.17g,%.17g,%.17g\n",
                 static_cast<unsigned long long>(i),
                 record.alice_quad[i] == kQuadX ? 'X' : 'P', record.alice[i],
                 record.bob_x[i], record.bob_p[i]);
  }
  if (std::fclose(f) != 0) fail_io("cannot finalize CSV file", path);
}

}  // namespace mbnla
