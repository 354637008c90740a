#include "fastrack/vf_io.h"

#include <bit>
#include <cstring>
#include <sstream>

#include "fastrack/error.h"

namespace fastrack {
namespace {

constexpr char kMagic[4] = {'F', 'T', 'V', 'F'};
constexpr std::uint32_t kMaxString = 1u << 16;
constexpr std::uint32_t kMaxDims = 16;

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) {
    out_.append(static_cast<const char*>(p), n);
  }
  template <typename T>
  void Uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  void F64(double v) { Uint(std::bit_cast<std::uint64_t>(v)); }
  void Str(const std::string& s) {
    Uint(static_cast<std::uint32_t>(s.size()));
    Bytes(s.data(), s.size());
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

[[noreturn]] void Corrupt(const std::string& why) {
  throw Error(ErrorCode::kCorruptFile, "value function file: " + why);
}

// Reads primitives from a byte source while hashing them.
template <typename Source>
class Parser {
 public:
  explicit Parser(Source& src, std::uint64_t& hash) : src_(src), hash_(hash) {}
  void Bytes(void* out, std::size_t n) {
    src_(out, n);
    hash_ = Fnv1a(out, n, hash_);
  }
  template <typename T>
  T Uint() {
    unsigned char b[sizeof(T)];
    Bytes(b, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[i]) << (8 * i);
    return v;
  }
  double F64() { return std::bit_cast<double>(Uint<std::uint64_t>()); }
  std::string Str() {
    const auto n = Uint<std::uint32_t>();
    if (n > kMaxString) Corrupt("string too long");
    std::string s(n, '\0');
    Bytes(s.data(), n);
    return s;
  }

 private:
  Source& src_;
  std::uint64_t& hash_;
};

void WriteHeader(Writer& w, const VfHeader& h) {
  w.Bytes(kMagic, 4);
  w.Uint<std::uint32_t>(h.version);
  w.Str(h.model);
  w.Str(h.part);
  w.Str(h.system_id);
  w.Str(h.error_id);
  w.Uint<std::uint64_t>(h.param_hash);
  w.Uint<std::uint32_t>(static_cast<std::uint32_t>(h.grid.ndims()));
  for (std::size_t d = 0; d < h.grid.ndims(); ++d) {
    const GridDim& g = h.grid.dim(d);
    w.F64(g.lo);
    w.F64(g.hi);
    w.Uint<std::uint64_t>(g.nodes);
    w.Uint<std::uint8_t>(g.periodic ? 1 : 0);
  }
  w.Uint<std::uint64_t>(h.times.size());
  for (double t : h.times) w.F64(t);
  w.Uint<std::uint8_t>(h.converged ? 1 : 0);
  w.F64(h.min_value);
  w.F64(h.epsilon);
  w.Uint<std::uint64_t>(h.steps);
}

template <typename Source>
VfHeader ParseHeader(Parser<Source>& p) {
  char magic[4];
  p.Bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) Corrupt("bad magic");
  VfHeader h;
  h.version = p.template Uint<std::uint32_t>();
  if (h.version != kVfVersion) {
    Corrupt("unsupported version " + std::to_string(h.version));
  }
  h.model = p.Str();
  h.part = p.Str();
  h.system_id = p.Str();
  h.error_id = p.Str();
  h.param_hash = p.template Uint<std::uint64_t>();
  const auto ndims = p.template Uint<std::uint32_t>();
  if (ndims == 0 || ndims > kMaxDims) Corrupt("bad dimension count");
  std::vector<GridDim> dims(ndims);
  for (GridDim& g : dims) {
    g.lo = p.F64();
    g.hi = p.F64();
    g.nodes = static_cast<std::size_t>(p.template Uint<std::uint64_t>());
    g.periodic = p.template Uint<std::uint8_t>() != 0;
  }
  try {
    h.grid = Grid(std::move(dims));
  } catch (const Error& e) {
    Corrupt(std::string("bad grid: ") + e.what());
  }
  const auto nsnap = p.template Uint<std::uint64_t>();
  if (nsnap == 0 || nsnap > (1u << 24)) Corrupt("bad snapshot count");
  h.times.resize(nsnap);
  for (double& t : h.times) t = p.F64();
  h.converged = p.template Uint<std::uint8_t>() != 0;
  h.min_value = p.F64();
  h.epsilon = p.F64();
  h.steps = p.template Uint<std::uint64_t>();
  return h;
}

}  // namespace

std::uint64_t ParamHash(const ModelInstance& model) {
  return Fnv1a(model.CanonicalParams());
}

VfHeader MakeHeader(const ValueFunction& vf, const ModelInstance& model,
                    const std::string& part) {
  VfHeader h;
  h.model = model.name;
  h.part = part;
  h.system_id = vf.system_id;
  h.error_id = vf.error_id;
  h.param_hash = ParamHash(model);
  h.grid = vf.grid;
  h.times = vf.times;
  h.converged = vf.converged;
  h.min_value = vf.min_value;
  h.epsilon = vf.epsilon;
  h.steps = vf.steps;
  return h;
}

std::string EncodeValueFunction(const VfHeader& header,
                                const ValueFunction& vf) {
  if (vf.values.size() != header.times.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "snapshot count differs from the header");
  }
  Writer w;
  WriteHeader(w, header);
  for (const auto& snap : vf.values) {
    if (snap.size() != header.grid.num_nodes()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "snapshot size differs from the grid");
    }
    for (double v : snap) w.F64(v);
  }
  w.Uint<std::uint64_t>(Fnv1a(w.str().data(), w.str().size()));
  return std::move(w.str());
}

ValueFunction DecodeValueFunction(const std::string& bytes, VfHeader* header) {
  std::size_t pos = 0;
  auto src = [&](void* out, std::size_t n) {
    if (bytes.size() - pos < n) Corrupt("truncated");
    std::memcpy(out, bytes.data() + pos, n);
    pos += n;
  };
  std::uint64_t hash = 14695981039346656037ull;
  Parser<decltype(src)> p(src, hash);
  const VfHeader h = ParseHeader(p);
  const std::size_t nodes = h.grid.num_nodes();
  const std::size_t need = h.times.size() * nodes * 8 + 8;
  if (bytes.size() - pos != need) Corrupt("size differs from the header");
  ValueFunction vf;
  vf.grid = h.grid;
  vf.times = h.times;
  vf.values.assign(h.times.size(), std::vector<double>(nodes));
  for (auto& snap : vf.values) {
    for (double& v : snap) v = p.F64();
  }
  const std::uint64_t expected = hash;
  std::uint64_t stored = 0;
  {
    std::uint64_t ignore = 0;
    Parser<decltype(src)> tail(src, ignore);
    stored = tail.template Uint<std::uint64_t>();
  }
  if (stored != expected) Corrupt("checksum mismatch");
  vf.converged = h.converged;
  vf.min_value = h.min_value;
  vf.epsilon = h.epsilon;
  vf.system_id = h.system_id;
  vf.error_id = h.error_id;
  vf.steps = h.steps;
  if (header) *header = h;
  return vf;
}

void SaveValueFunction(const std::string& path, const VfHeader& header,
                       const ValueFunction& vf) {
  const std::string bytes = EncodeValueFunction(header, vf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  }
}

VfReader::VfReader(const std::string& path)
    : in_(path, std::ios::binary), hash_(14695981039346656037ull) {
  if (!in_) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  auto src = [this](void* out, std::size_t n) { Read(out, n); };
  Parser<decltype(src)> p(src, hash_);
  header_ = ParseHeader(p);
}

void VfReader::Read(void* out, std::size_t n) {
  in_.read(static_cast<char*>(out), static_cast<std::streamsize>(n));
  if (in_.gcount() != static_cast<std::streamsize>(n)) Corrupt("truncated");
}

bool VfReader::Next(std::vector<double>& values) {
  if (next_ == header_.times.size()) return false;
  auto src = [this](void* out, std::size_t n) { Read(out, n); };
  Parser<decltype(src)> p(src, hash_);
  values.resize(header_.grid.num_nodes());
  for (double& v : values) v = p.F64();
  if (++next_ == header_.times.size()) {
    const std::uint64_t expected = hash_;
    std::uint64_t ignore = 0;
    Parser<decltype(src)> tail(src, ignore);
    if (tail.template Uint<std::uint64_t>() != expected) {
      Corrupt("checksum mismatch");
    }
    char extra;
    if (in_.read(&extra, 1).gcount() != 0) Corrupt("trailing bytes");
  }
  return true;
}

ValueFunction LoadValueFunction(const std::string& path, VfHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return DecodeValueFunction(buf.str(), header);
}

ValueFunction LoadValueFunction(const std::string& path,
                                const ModelInstance& model,
                                const std::string& part) {
  VfHeader h;
  ValueFunction vf = LoadValueFunction(path, &h);
  if (h.model != model.name || h.part != part ||
      h.param_hash != ParamHash(model)) {
    throw Error(ErrorCode::kHashMismatch,
                path + " was computed for a different model or parameters");
  }
  return vf;
}

}  // namespace fastrack
