#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "xugt/errors.hpp"
#include "xugt/model.hpp"
#include "xugt/weights.hpp"

using namespace xugt;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.stem_width = 8;
  cfg.stages = {
      StageSpec{8, 1, 0, false, false, false, 2.5},
      StageSpec{8, 1, 0, false, false, false, 2.5},
      StageSpec{16, 1, 1, true, false, true, 2.5},
      StageSpec{16, 1, 1, true, true, true, 2.5},
  };
  cfg.head_mid_width = 32;
  cfg.num_classes = 5;
  cfg.input = InputSpec{4, 32, 32};
  return cfg;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  REQUIRE(out.good());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<float> flatten(const Model& m) {
  std::vector<float> out;
  visit_buffers(m, [&](const ConstBufferRef& b) {
    out.insert(out.end(), b.data, b.data + b.size);
  });
  return out;
}

}  // namespace

TEST_CASE("weights survive a save/load round trip bit for bit") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 77);
  const auto path = temp_file("xugt_roundtrip.bin");
  save_weights(m, path);
  Model back = load_weights(cfg, path);
  CHECK(flatten(m) == flatten(back));
  std::filesystem::remove(path);
}

TEST_CASE("weight file starts with the magic and version") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 1);
  const auto path = temp_file("xugt_header.bin");
  save_weights(m, path);
  std::vector<char> bytes = slurp(path);
  REQUIRE(bytes.size() > 12);
  CHECK(std::string(bytes.data(), 4) == "XUGT");
  const uint32_t version = static_cast<uint8_t>(bytes[4]) |
                           (static_cast<uint32_t>(static_cast<uint8_t>(bytes[5])) << 8) |
                           (static_cast<uint32_t>(static_cast<uint8_t>(bytes[6])) << 16) |
                           (static_cast<uint32_t>(static_cast<uint8_t>(bytes[7])) << 24);
  CHECK(version == kWeightFormatVersion);
  std::filesystem::remove(path);
}

TEST_CASE("missing weight file raises an I/O error") {
  CHECK_THROWS_AS(load_weights(small_config(), temp_file("xugt_nonexistent.bin")), IoError);
}

TEST_CASE("corrupted magic raises an I/O error naming the problem") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 2);
  const auto path = temp_file("xugt_badmagic.bin");
  save_weights(m, path);
  std::vector<char> bytes = slurp(path);
  bytes[0] = 'Y';
  spit(path, bytes);
  CHECK_THROWS_WITH_AS(load_weights(cfg, path), doctest::Contains("magic"), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("unsupported version raises an I/O error") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 3);
  const auto path = temp_file("xugt_badversion.bin");
  save_weights(m, path);
  std::vector<char> bytes = slurp(path);
  bytes[4] = 9;
  spit(path, bytes);
  CHECK_THROWS_WITH_AS(load_weights(cfg, path), doctest::Contains("version"), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("truncated file raises an I/O error") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 4);
  const auto path = temp_file("xugt_truncated.bin");
  save_weights(m, path);
  std::vector<char> bytes = slurp(path);
  bytes.resize(bytes.size() / 2);
  spit(path, bytes);
  CHECK_THROWS_AS(load_weights(cfg, path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("a flipped payload byte is caught by the trailing digest") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 5);
  const auto path = temp_file("xugt_bitflip.bin");
  save_weights(m, path);
  std::vector<char> bytes = slurp(path);
  // Last byte of the final tensor's payload, right before the 8-byte digest.
  bytes[bytes.size() - 9] ^= 0x40;
  spit(path, bytes);
  CHECK_THROWS_WITH_AS(load_weights(cfg, path), doctest::Contains("digest"), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("trailing garbage after the digest is rejected") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 6);
  const auto path = temp_file("xugt_trailing.bin");
  save_weights(m, path);
  std::vector<char> bytes = slurp(path);
  bytes.push_back(0);
  spit(path, bytes);
  CHECK_THROWS_AS(load_weights(cfg, path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("weights saved for one architecture do not load into another") {
  const ModelConfig cfg = small_config();
  Model m = build_model(cfg, InitKind::kSeededRandom, 7);
  const auto path = temp_file("xugt_archmismatch.bin");
  save_weights(m, path);

  // Wider head: the stored head tensors have the wrong shape.
  ModelConfig wider = cfg;
  wider.head_mid_width = 64;
  CHECK_THROWS_AS(load_weights(wider, path), ShapeError);

  // Extra gate: the rebuilt model wants tensors the file does not have.
  ModelConfig gated = cfg;
  gated.stages[0].tada_first_k = 1;
  CHECK_THROWS_WITH_AS(load_weights(gated, path), doctest::Contains("missing"), ShapeError);
  std::filesystem::remove(path);
}
