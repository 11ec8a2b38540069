#include "xugt/weights.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "xugt/errors.hpp"
#include "xugt/rng.hpp"

namespace xugt {

namespace {

constexpr char kMagic[4] = {'X', 'U', 'G', 'T'};

void put_bytes(std::string& out, const void* data, size_t len) {
  out.append(static_cast<const char*>(data), len);
}

template <typename T>
void put_le(std::string& out, T value) {
  unsigned char bytes[sizeof(T)];
  for (size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>((static_cast<uint64_t>(value) >> (8 * i)) & 0xff);
  }
  put_bytes(out, bytes, sizeof(T));
}

void put_f32(std::string& out, const float* data, size_t count) {
  // floats are serialized through their IEEE-754 bit patterns, little-endian
  for (size_t i = 0; i < count; ++i) {
    uint32_t bits;
    std::memcpy(&bits, &data[i], sizeof(bits));
    put_le(out, bits);
  }
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  std::string context = "header";

  bool has(size_t n) const { return pos + n <= buf.size(); }
  void need(size_t n) {
    if (!has(n)) throw IoError("weight file truncated in " + context);
  }
  template <typename T>
  T get_le() {
    need(sizeof(T));
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    }
    pos += sizeof(T);
    return static_cast<T>(v);
  }
  std::string get_string(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

struct StoredTensor {
  std::vector<int64_t> dims;
  std::vector<float> data;
};

}  // namespace

void save_weights(const Model& m, const std::filesystem::path& path) {
  std::string out;
  put_bytes(out, kMagic, sizeof(kMagic));
  put_le<uint32_t>(out, kWeightFormatVersion);
  uint32_t count = 0;
  visit_buffers(m, [&](const ConstBufferRef&) { ++count; });
  put_le<uint32_t>(out, count);
  visit_buffers(m, [&](const ConstBufferRef& ref) {
    put_le<uint16_t>(out, static_cast<uint16_t>(ref.name.size()));
    put_bytes(out, ref.name.data(), ref.name.size());
    put_le<uint8_t>(out, static_cast<uint8_t>(ref.dims.size()));
    for (int64_t d : ref.dims) put_le<uint32_t>(out, static_cast<uint32_t>(d));
    put_f32(out, ref.data, static_cast<size_t>(ref.size));
  });
  put_le<uint64_t>(out, fnv1a64(out.data(), out.size()));
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write weight file " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing weight file " + path.string());
}

Model load_weights(const ModelConfig& cfg, const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open weight file " + path.string());
  std::string buf((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  Reader r{buf};

  const std::string magic = r.get_string(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw IoError("bad magic in weight file " + path.string());
  }
  const auto version = r.get_le<uint32_t>();
  if (version != kWeightFormatVersion) {
    throw IoError("unsupported weight file version " + std::to_string(version) + " (expected " +
                  std::to_string(kWeightFormatVersion) + ")");
  }
  const auto count = r.get_le<uint32_t>();

  std::map<std::string, StoredTensor> tensors;
  for (uint32_t i = 0; i < count; ++i) {
    r.context = "tensor header #" + std::to_string(i);
    const auto name_len = r.get_le<uint16_t>();
    const std::string name = r.get_string(name_len);
    r.context = "tensor " + name;
    const auto ndim = r.get_le<uint8_t>();
    StoredTensor st;
    int64_t total = 1;
    for (uint8_t d = 0; d < ndim; ++d) {
      const auto dim = r.get_le<uint32_t>();
      st.dims.push_back(static_cast<int64_t>(dim));
      total *= static_cast<int64_t>(dim);
    }
    if (!r.has(static_cast<size_t>(total) * 4)) {
      throw IoError("truncated tensor " + name);
    }
    st.data.resize(static_cast<size_t>(total));
    for (int64_t j = 0; j < total; ++j) {
      const auto bits = r.get_le<uint32_t>();
      float v;
      std::memcpy(&v, &bits, sizeof(v));
      st.data[static_cast<size_t>(j)] = v;
    }
    if (tensors.count(name)) throw IoError("duplicate tensor " + name + " in weight file");
    tensors.emplace(name, std::move(st));
  }
  r.context = "digest";
  const auto stored_digest = r.get_le<uint64_t>();
  const uint64_t actual = fnv1a64(buf.data(), buf.size() - 8);
  if (stored_digest != actual) {
    throw IoError("weight file digest mismatch in " + path.string());
  }
  if (r.pos != buf.size()) {
    throw IoError("trailing bytes after digest in weight file " + path.string());
  }

  Model m = build_model(cfg, InitKind::kZeros);
  visit_buffers(m, [&](const BufferRef& ref) {
    auto it = tensors.find(ref.name);
    if (it == tensors.end()) {
      throw ShapeError("weight file is missing tensor " + ref.name);
    }
    const StoredTensor& st = it->second;
    if (st.dims != ref.dims) {
      auto dims_str = [](const std::vector<int64_t>& d) {
        std::string s = "(";
        for (size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
        return s + ")";
      };
      throw ShapeError("tensor " + ref.name + " shape mismatch: file has " + dims_str(st.dims) +
                       ", config expects " + dims_str(ref.dims));
    }
    std::memcpy(ref.data, st.data.data(), st.data.size() * sizeof(float));
    tensors.erase(it);
  });
  if (!tensors.empty()) {
    throw ShapeError("weight file has unknown tensor " + tensors.begin()->first);
  }
  return m;
}

}  // namespace xugt
