#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <string>

#include "mbnla/measurement.hpp"

namespace mbnla {

// Binary record files. Fixed little-endian layout so records are
// byte-identical across runs and machines:
//
//   offset  size  field
//   0       4     magic "MBNL"
//   4       4     u32 format version (1)
//   8       4     u32 convention tag (1 = natural-quadrature-v1)
//   12      4     u32 reserved (0)
//   16      8     u64 seed
//   24      8     u64 state digest
//   32      8     u64 shot count
//   40      8     f64 gain applied (1.0 = unfiltered)
//   48      8     u64 payload digest (FNV-1a over payload bytes)
//   56      ...   shots, 25 bytes each: u8 alice_quad, f64 alice_value,
//                 f64 bob_x, f64 bob_p
//
// The payload digest and shot count are verified on load.

inline constexpr uint32_t kRecordVersion = 1;
inline constexpr uint64_t kRecordHeaderSize = 56;
inline constexpr uint64_t kRecordShotSize = 25;

/// Writes a whole in-memory record. Byte-for-byte deterministic.
void write_record(const MeasurementRecord& record, const std::string& path);

/// Loads a record, verifying magic, version, counts and payload digest.
MeasurementRecord read_record(const std::string& path);

/// Reads only the header fields of a record file.
RecordMeta read_record_meta(const std::string& path,
                            uint64_t* shot_count = nullptr);

/// Incremental writer for ensembles that never fit in memory: header is
/// patched with the final count and digest on close.
class RecordWriter {
 public:
  RecordWriter(const std::string& path, const RecordMeta& meta);
  ~RecordWriter();
  RecordWriter(const RecordWriter&) = delete;
  RecordWriter& operator=(const RecordWriter&) = delete;

  void append(const MeasurementRecord& chunk);
  /// Finalizes the header; further appends are invalid.
  void close();
  uint64_t shots_written() const { return shots_; }

 private:
  std::ofstream out_;
  std::string path_;
  RecordMeta meta_;
  uint64_t shots_ = 0;
  uint64_t digest_;
  bool closed_ = false;
};

/// Plain-text export for interoperability.
void write_record_csv(const MeasurementRecord& record, const std::string& path);

}  // namespace mbnla
