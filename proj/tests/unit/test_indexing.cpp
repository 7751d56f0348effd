#include <gtest/gtest.h>

#include <set>

#include "gom/error.hpp"
#include "gom/indexing.hpp"

using namespace gom;

namespace {

// Every cell of the scheme by brute-force odometer.
std::vector<CellIndex> all_cells(const Scheme& s) {
  std::vector<CellIndex> out;
  std::vector<int> x(s.measurements(), 0);
  while (true) {
    out.emplace_back(x);
    std::size_t j = s.measurements();
    while (j > 0) {
      --j;
      if (x[j] < s.outcomes(j)) {
        ++x[j];
        break;
      }
      x[j] = 0;
      if (j == 0) return out;
    }
  }
}

}  // namespace

TEST(Scheme, SizesAndRowLabels) {
  Scheme s({2, 3, 2});
  EXPECT_EQ(s.total_outcomes(), 7u);
  EXPECT_EQ(s.outcome_product(), 12u);
  EXPECT_EQ(s.cell_count(), 36u);
  EXPECT_EQ(s.row_index(1, 2), 3u);
  EXPECT_EQ(s.row_label(3), "(2,2)");
  for (std::size_t r = 0; r < s.total_outcomes(); ++r) {
    auto [j, l] = s.row_pair(r);
    EXPECT_EQ(s.row_index(j, l), r);
  }
}

TEST(Scheme, RejectsFewerThanTwoOutcomes) {
  EXPECT_THROW(Scheme({2, 1}), InputError);
  EXPECT_THROW(Scheme(std::vector<int>{}), InputError);
}

TEST(CellIndex, OrderZeroSetAndText) {
  CellIndex c({1, 0, 2});
  EXPECT_EQ(c.order(), 2u);
  EXPECT_EQ(c.zero_set(), MeasurementSet({1}));
  EXPECT_EQ(c.to_string(), "(1,0,2)");
  EXPECT_EQ(c.with(1, 3).to_string(), "(1,3,2)");
  EXPECT_TRUE(c.is_marginal_on({1}));
  EXPECT_FALSE(c.is_marginal_on({0}));
}

TEST(CellIndex, ValidateRejectsOutOfRange) {
  Scheme s({2, 2});
  EXPECT_NO_THROW(validate_cell(s, CellIndex({2, 0})));
  EXPECT_THROW(validate_cell(s, CellIndex({3, 0})), InputError);
  EXPECT_THROW(validate_cell(s, CellIndex({1, 0, 0})), InputError);
  EXPECT_THROW(validate_cell(s, CellIndex({-1, 0})), InputError);
}

TEST(EnumerateCells, MatchesBruteForceFilter) {
  Scheme s({2, 3, 2, 3});
  const auto all = all_cells(s);
  ASSERT_EQ(all.size(), s.cell_count());
  for (const MeasurementSet& zeros : {MeasurementSet{}, MeasurementSet{0}, MeasurementSet{1, 3}, MeasurementSet{0, 1, 2, 3}}) {
    std::vector<CellIndex> expected;
    for (const auto& c : all)
      if (c.zero_set() == zeros) expected.push_back(c);
    EXPECT_EQ(enumerate_cells(s, zeros), expected);
  }
}

TEST(CellsUpToOrder, MatchesBruteForceFilterAndIsSorted) {
  Scheme s({3, 2, 2, 2});
  const auto all = all_cells(s);
  for (std::size_t order = 0; order <= 4; ++order) {
    std::vector<CellIndex> expected;
    for (const auto& c : all)
      if (c.order() <= order) expected.push_back(c);
    EXPECT_EQ(cells_up_to_order(s, order), expected) << "order " << order;
  }
}

TEST(Refinement, ProjectAndRefines) {
  CellIndex fine({1, 2, 1});
  CellIndex coarse = project(fine, {1});
  EXPECT_EQ(coarse, CellIndex({1, 0, 1}));
  EXPECT_TRUE(refines(fine, coarse));
  EXPECT_FALSE(refines(coarse, fine));
  EXPECT_FALSE(refines(CellIndex({2, 2, 1}), coarse));
  EXPECT_TRUE(refines(coarse, coarse));
}

TEST(PowerIndex, CountsAndMultinomials) {
  for (std::size_t dims = 1; dims <= 4; ++dims) {
    for (int order = 0; order <= 4; ++order) {
      const auto vs = v_indices(order, dims);
      EXPECT_EQ(vs.size(), v_index_count(order, dims));
      EXPECT_TRUE(std::is_sorted(vs.begin(), vs.end()));
      std::uint64_t total = 0;
      for (const auto& v : vs) {
        EXPECT_EQ(v.order(), order);
        total += multinomial_C(v);
      }
      // sum_v C_v = dims^order (multinomial theorem).
      std::uint64_t power = 1;
      for (int i = 0; i < order; ++i) power *= dims;
      EXPECT_EQ(total, power);
    }
  }
  EXPECT_EQ(multinomial_C(PowerIndex({1, 1})), 2u);
  EXPECT_EQ(multinomial_C(PowerIndex({2, 1, 1})), 12u);
  EXPECT_EQ(PowerIndex::unit(3, 1, 2), PowerIndex({0, 2, 0}));
  EXPECT_EQ(PowerIndex({1, 0}).plus_unit(1), PowerIndex({1, 1}));
}

TEST(CellCodes, RoundTripAndBijective) {
  Scheme s({2, 3, 2});
  std::set<std::uint64_t> codes;
  for (const auto& c : all_cells(s)) {
    const auto code = encode_cell(s, c);
    EXPECT_LT(code, s.cell_count());
    EXPECT_EQ(decode_cell(s, code), c);
    codes.insert(code);
  }
  EXPECT_EQ(codes.size(), s.cell_count());
}
