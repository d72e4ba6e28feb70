#include <gtest/gtest.h>

#include <set>
#include <stdexcept>

#include "pbci/eeg/types.hpp"

namespace {

using namespace pbci::eeg;

TEST(SubjectId, RejectsIndicesOutsideRange) {
  EXPECT_THROW(SubjectId(0), std::invalid_argument);
  EXPECT_THROW(SubjectId(9, 8), std::invalid_argument);
  EXPECT_EQ(SubjectId(8, 8).ordinal(), 7u);
  EXPECT_EQ(SubjectId(3).index(), 3);
}

TEST(Labels, OrdinalsAndNamesRoundTrip) {
  ASSERT_EQ(kAllLabels.size(), 4u);
  ASSERT_EQ(kAllParadigms.size(), 3u);
  for (std::size_t i = 0; i < kAllLabels.size(); ++i) {
    const auto l = label_from_ordinal(i);
    EXPECT_EQ(ordinal(l), i);
    EXPECT_EQ(parse_label(to_string(l)), l);
  }
  for (auto p : kAllParadigms) EXPECT_EQ(parse_paradigm(to_string(p)), p);
  EXPECT_EQ(to_string(ImageryLabel::snowman), "snowman");
  EXPECT_EQ(to_string(Paradigm::VI), "VI");
  EXPECT_FALSE(parse_label("banana").has_value());
  EXPECT_THROW(label_from_ordinal(4), std::invalid_argument);
}

TEST(SampleMatrix, ChannelMajorLayout) {
  SampleMatrix m(2, 3);
  m(1, 2) = 5.0f;
  EXPECT_EQ(m.values()[5], 5.0f);
  EXPECT_EQ(m.channel(1)[2], 5.0f);
  EXPECT_TRUE(m.all_finite());
  m(0, 0) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(m.all_finite());
  EXPECT_THROW(SampleMatrix(2, 3, std::vector<float>(5)), std::invalid_argument);
}

TEST(Montage, Standard32HasUniqueNames) {
  const auto m = Montage::standard32();
  ASSERT_EQ(m.size(), 32u);
  std::set<std::string> names(m.names().begin(), m.names().end());
  EXPECT_EQ(names.size(), 32u);
  EXPECT_THROW(Montage({"Cz", "Cz"}), std::invalid_argument);
}

}  // namespace
