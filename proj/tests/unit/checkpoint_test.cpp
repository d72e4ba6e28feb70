#include <gtest/gtest.h>

#include <cstring>

#include "pbci/nn/checkpoint.hpp"
#include "test_support.hpp"

namespace {

using namespace pbci::nn;

std::vector<NamedTensor> sample_entries() {
  return {{"a.weight", Tensor<float>({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6})},
          {"a.bias", Tensor<float>({2}, std::vector<float>{-0.5f, 0.25f})}};
}

TEST(Checkpoint, LayoutIsBitExact) {
  const auto bytes = encode_checkpoint(sample_entries());
  // version, count
  const std::uint8_t head[8] = {1, 0, 0, 0, 2, 0, 0, 0};
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(std::memcmp(bytes.data(), head, 8), 0);
  // first entry: name length 8, "a.weight", rank 2, dims 2 and 3
  const std::uint8_t entry[] = {8, 0, 0, 0, 'a', '.', 'w', 'e', 'i', 'g', 'h', 't', 2, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0};
  EXPECT_EQ(std::memcmp(bytes.data() + 8, entry, sizeof entry), 0);
  const std::size_t expected = 8 + (4 + 8 + 4 + 8 + 24) + (4 + 6 + 4 + 4 + 8);
  EXPECT_EQ(bytes.size(), expected);
}

TEST(Checkpoint, RoundTripAndRejections) {
  const auto entries = sample_entries();
  const auto bytes = encode_checkpoint(entries);
  const auto back = decode_checkpoint(bytes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "a.weight");
  EXPECT_EQ(back[0].tensor, entries[0].tensor);
  EXPECT_EQ(back[1].tensor, entries[1].tensor);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_THROW((void)decode_checkpoint(truncated), std::runtime_error);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW((void)decode_checkpoint(trailing), std::runtime_error);
  auto version = bytes;
  version[0] = 9;
  EXPECT_THROW((void)decode_checkpoint(version), std::runtime_error);

  pbci::testing::TempDir dir("ckpt");
  write_checkpoint(entries, dir / "m.ckpt");
  const auto file = read_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(file[1].tensor, entries[1].tensor);
}

}  // namespace
