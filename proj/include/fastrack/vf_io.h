#ifndef FASTRACK_VF_IO_H_
#define FASTRACK_VF_IO_H_

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fastrack/catalog.h"
#include "fastrack/hjsolver.h"

namespace fastrack {

// Value function file layout, little-endian throughout:
//   "FTVF", u32 version, str model, str part, str system_id, str error_id,
//   u64 param_hash, u32 ndims, ndims x (f64 lo, f64 hi, u64 nodes,
//   u8 periodic), u64 nsnap, nsnap x f64 time, u8 converged, f64 min_value,
//   f64 epsilon, u64 steps, nsnap x nodes x f64 value (row-major),
//   u64 FNV-1a of every preceding byte.
// A str is a u32 length followed by its bytes.
inline constexpr std::uint32_t kVfVersion = 1;

struct VfHeader {
  std::uint32_t version = kVfVersion;
  // Catalog name of the model pair.
  std::string model;
  // Subsystem name; empty for the full relative system.
  std::string part;
  std::string system_id;
  std::string error_id;
  std::uint64_t param_hash = 0;
  Grid grid;
  std::vector<double> times;
  bool converged = false;
  double min_value = 0.0;
  double epsilon = 0.0;
  std::uint64_t steps = 0;
};

// Hash binding a file to the exact model parameters.
std::uint64_t ParamHash(const ModelInstance& model);

// Header describing vf as part `part` of `model`.
VfHeader MakeHeader(const ValueFunction& vf, const ModelInstance& model,
                    const std::string& part);

std::string EncodeValueFunction(const VfHeader& header,
                                const ValueFunction& vf);
// Throws kCorruptFile on any structural problem or checksum mismatch.
ValueFunction DecodeValueFunction(const std::string& bytes,
                                  VfHeader* header = nullptr);

void SaveValueFunction(const std::string& path, const VfHeader& header,
                       const ValueFunction& vf);

// Streams a file one snapshot at a time. The checksum is verified when the
// last snapshot has been read.
class VfReader {
 public:
  explicit VfReader(const std::string& path);
  const VfHeader& header() const { return header_; }
  // False once every snapshot has been read.
  bool Next(std::vector<double>& values);

 private:
  void Read(void* out, std::size_t n);

  std::ifstream in_;
  VfHeader header_;
  std::uint64_t hash_;
  std::size_t next_ = 0;
};

// Loads a file and checks it against the requesting model and part:
// kHashMismatch when the model, part or parameter hash differ.
ValueFunction LoadValueFunction(const std::string& path,
                                const ModelInstance& model,
                                const std::string& part);
// Loads without a binding check.
ValueFunction LoadValueFunction(const std::string& path,
                                VfHeader* header = nullptr);

}  // namespace fastrack

#endif  // FASTRACK_VF_IO_H_
