#include <catch2/catch_amalgamated.hpp>

#include "paslab/dm.hpp"
#include "test_oracles.hpp"

using namespace paslab;

namespace {

AmplitudeAlphabet alpha13() { return {{1, 3}}; }

DmSpec ss_spec(int n, int k) {
  DmSpec s;
  s.kind = DmKind::SS;
  s.n = n;
  s.k = k;
  s.alphabet = alpha13();
  return s;
}

}  // namespace

TEST_CASE("energy trellis counts match enumeration") {
  const auto tc = build_energy_trellis(alpha13(), 4, 20);
  CHECK(tc.count_leq(0, 4) == 1);   // only 1,1,1,1
  CHECK(tc.count_leq(0, 12) == 5);
  CHECK(tc.count_leq(0, 20) == 11);  // 1 + 4 + 6
  CHECK(tc.verify());

  const auto tc2 = build_energy_trellis(alpha13(), 2, 18);
  CHECK(tc2.count_leq(0, 18) == 4);  // all sequences of {1,3}^2

  // cross-check against brute force on a larger case
  const std::vector<int> levels{1, 3, 5, 7};
  const auto tc3 = build_energy_trellis(AmplitudeAlphabet{levels}, 5, 100);
  BigInt expect = 0;
  for (const auto& seq : oracle::all_sequences(levels, 5))
    if (oracle::seq_energy(seq) <= 100) ++expect;
  CHECK(tc3.count_leq(0, 100) == expect);
  CHECK(tc3.verify());
}

TEST_CASE("energy trellis rejects unreachable budget") {
  CHECK_THROWS_AS(build_energy_trellis(alpha13(), 4, 3), CapacityError);
}

TEST_CASE("min sphere energy") {
  CHECK(min_sphere_energy(alpha13(), 4, 0) == 4);
  CHECK(min_sphere_energy(alpha13(), 4, 2) == 12);
  CHECK(min_sphere_energy(alpha13(), 4, 3) == 20);
  CHECK_THROWS_AS(min_sphere_energy(alpha13(), 4, 5), CapacityError);  // 2^5 > 2^4
}

TEST_CASE("ESS encode matches the lexicographic sphere oracle") {
  const auto dm = DistributionMatcher::build(ss_spec(4, 3));
  CHECK(dm.encode(0).amplitudes == std::vector<int>{1, 1, 1, 1});
  CHECK(dm.encode(3).amplitudes == std::vector<int>{1, 1, 3, 3});
  CHECK(dm.encode(7).amplitudes == std::vector<int>{3, 1, 1, 1});

  const auto image = oracle::sphere_image({1, 3}, 4, 20, 8);
  for (std::size_t i = 0; i < image.size(); ++i) CHECK(dm.encode(i).amplitudes == image[i]);
}

TEST_CASE("ESS decode inverts encode and rejects out-of-support input") {
  const auto dm = DistributionMatcher::build(ss_spec(4, 3));
  CHECK(dm.decode(AmplitudeBlock::from_levels({1, 1, 1, 1})) == 0);
  CHECK(dm.decode(AmplitudeBlock::from_levels({1, 1, 3, 3})) == 3);
  CHECK_THROWS_AS(dm.decode(AmplitudeBlock::from_levels({3, 3, 3, 3})), DecodeError);
  // in-sphere but beyond the 2^k image (rank 10 of 11)
  CHECK_THROWS_AS(dm.decode(AmplitudeBlock::from_levels({3, 3, 1, 1})), DecodeError);
}

TEST_CASE("ESS image equals brute-force oracle across geometries") {
  for (const std::vector<int> levels :
       {std::vector<int>{1, 3}, std::vector<int>{1, 3, 5}, std::vector<int>{1, 3, 5, 7}}) {
    for (int n : {2, 4, 6, 8}) {
      const double max_k = n * std::log2(static_cast<double>(levels.size()));
      for (int k : {1, 3, 5, 8}) {
        if (k + 1 > max_k) continue;
        DmSpec spec;
        spec.kind = DmKind::SS;
        spec.n = n;
        spec.k = k;
        spec.alphabet = {levels};
        const auto dm = DistributionMatcher::build(spec);
        const auto e_max = min_sphere_energy(spec.alphabet, n, k);
        const auto image = oracle::sphere_image(levels, n, e_max, 1u << k);
        REQUIRE(image.size() == (1u << k));
        for (std::size_t i = 0; i < image.size(); i += 3)
          CHECK(dm.encode(i).amplitudes == image[i]);
        CHECK(dm.encode(image.size() - 1).amplitudes == image.back());
      }
    }
  }
}

TEST_CASE("shell support for SM and SM-max") {
  DmSpec sm1;
  sm1.kind = DmKind::SM;
  sm1.shells = 1;
  sm1.n = 4;
  sm1.k = 2;
  sm1.alphabet = alpha13();
  const auto sup1 = shell_support(sm1);
  CHECK(sup1.energies == std::vector<std::int64_t>{12});
  CHECK(sup1.counts[0] == 4);

  DmSpec sm2 = sm1;
  sm2.shells = 2;
  const auto sup2 = shell_support(sm2);
  CHECK(sup2.energies == std::vector<std::int64_t>{4, 12});
  CHECK(sup2.admitted == 5);

  DmSpec smmax;
  smmax.kind = DmKind::SmMax;
  smmax.n = 4;
  smmax.k = 3;
  smmax.alphabet = alpha13();
  const auto supm = shell_support(smmax);
  CHECK(supm.energies == std::vector<std::int64_t>{20, 28});
  CHECK(supm.admitted == 10);
}

TEST_CASE("SM encode/decode restricted to the shell window") {
  DmSpec sm1;
  sm1.kind = DmKind::SM;
  sm1.shells = 1;
  sm1.n = 4;
  sm1.k = 2;
  sm1.alphabet = alpha13();
  const auto dm = DistributionMatcher::build(sm1);
  // lexicographically first sequence of the single shell at energy 12
  const auto image = oracle::range_image({1, 3}, 4, 12, 12, 4);
  CHECK(dm.encode(0).amplitudes == image[0]);
  CHECK(image[0] == std::vector<int>{1, 1, 1, 3});
  for (int b = 0; b < 4; ++b) CHECK(dm.decode(dm.encode(b)) == b);

  DmSpec sm2 = sm1;
  sm2.shells = 2;
  const auto dm2 = DistributionMatcher::build(sm2);
  CHECK(dm2.encode(0).amplitudes == std::vector<int>{1, 1, 1, 1});  // shell 4 admitted
}

TEST_CASE("CCDM encode: constant composition, arithmetic-exact") {
  DmSpec spec;
  spec.kind = DmKind::CCDM;
  spec.n = 4;
  spec.alphabet = alpha13();
  spec.composition = {2, 2};
  spec.k = 2;  // floor(log2 6)
  const auto dm = DistributionMatcher::build(spec);
  for (int b = 0; b < 4; ++b) {
    const auto blk = dm.encode(b);
    int ones = 0, threes = 0;
    for (int a : blk.amplitudes) (a == 1 ? ones : threes) += 1;
    CHECK(ones == 2);
    CHECK(threes == 2);
    CHECK(dm.decode(blk) == b);
  }
  // degenerate single-permutation composition
  DmSpec one;
  one.kind = DmKind::CCDM;
  one.n = 4;
  one.alphabet = alpha13();
  one.composition = {4, 0};
  one.k = 0;
  const auto dm1 = DistributionMatcher::build(one);
  CHECK(dm1.encode(0).amplitudes == std::vector<int>{1, 1, 1, 1});

  // k above capacity
  DmSpec over = spec;
  over.k = 3;  // 2^3 > 6
  CHECK_THROWS_AS(DistributionMatcher::build(over), CapacityError);
}

TEST_CASE("CCDM decode errors") {
  DmSpec spec;
  spec.kind = DmKind::CCDM;
  spec.n = 4;
  spec.alphabet = alpha13();
  spec.composition = {2, 2};
  spec.k = 2;
  const auto dm = DistributionMatcher::build(spec);
  CHECK_THROWS_AS(dm.decode(AmplitudeBlock::from_levels({3, 3, 3, 1})), DecodeError);
  // (3,3,1,1) is the lexicographically last of 6 permutations: outside the 4-image
  CHECK_THROWS_AS(dm.decode(AmplitudeBlock::from_levels({3, 3, 1, 1})), DecodeError);
  // consistency with the enumerated image
  const auto image = oracle::range_image({1, 3}, 4, 20, 20, 4);
  for (std::size_t i = 0; i < image.size(); ++i)
    CHECK(dm.decode(AmplitudeBlock::from_levels(image[i])) == i);
}

TEST_CASE("round trip identity for every kind, exhaustive") {
  std::vector<DmSpec> specs;
  {
    DmSpec s;
    s.kind = DmKind::SS;
    s.n = 8;
    s.k = 12;
    s.alphabet = {{1, 3, 5, 7}};
    specs.push_back(s);
  }
  {
    DmSpec s;
    s.kind = DmKind::SM;
    s.shells = 1;
    s.n = 6;
    s.k = 4;
    s.alphabet = {{1, 3, 5}};
    specs.push_back(s);
    s.shells = 2;
    s.k = 6;
    specs.push_back(s);
  }
  {
    DmSpec s;
    s.kind = DmKind::SmMax;
    s.n = 8;
    s.k = 10;
    s.alphabet = {{1, 3, 5, 7}};
    specs.push_back(s);
  }
  {
    DmSpec s;
    s.kind = DmKind::CCDM;
    s.n = 8;
    s.alphabet = {{1, 3, 5}};
    s.composition = {4, 3, 1};
    s.k = floor_log2(multinomial(s.composition));  // 8!/(4!3!1!) = 280 -> k=8
    specs.push_back(s);
  }
  for (const auto& spec : specs) {
    const auto dm = DistributionMatcher::build(spec);
    const BigInt total = BigInt(1) << spec.k;
    for (BigInt b = 0; b < total; ++b) {
      const auto blk = dm.encode(b);
      REQUIRE(static_cast<int>(blk.amplitudes.size()) == spec.n);
      REQUIRE(dm.decode(blk) == b);
    }
  }
}

TEST_CASE("shell cardinality invariants") {
  // SM(1): constant energy image
  DmSpec sm1;
  sm1.kind = DmKind::SM;
  sm1.shells = 1;
  sm1.n = 6;
  sm1.k = 4;
  sm1.alphabet = {{1, 3, 5}};
  const auto dm1 = DistributionMatcher::build(sm1);
  const auto e0 = dm1.encode(0).energy;
  for (int b = 1; b < 16; ++b) CHECK(dm1.encode(b).energy == e0);

  // SM(m): image spans at most m energies
  DmSpec sm3 = sm1;
  sm3.shells = 3;
  sm3.k = 6;
  const auto dm3 = DistributionMatcher::build(sm3);
  std::vector<std::int64_t> seen;
  for (int b = 0; b < 64; ++b) {
    const auto e = dm3.encode(b).energy;
    if (std::find(seen.begin(), seen.end(), e) == seen.end()) seen.push_back(e);
  }
  CHECK(seen.size() <= 3);
}

TEST_CASE("average sequence energy") {
  CHECK(average_sequence_energy(ss_spec(4, 3)) == Catch::Approx(14.0).margin(1e-12));
  DmSpec sm1;
  sm1.kind = DmKind::SM;
  sm1.shells = 1;
  sm1.n = 4;
  sm1.k = 2;
  sm1.alphabet = alpha13();
  CHECK(average_sequence_energy(sm1) == Catch::Approx(12.0).margin(1e-12));
  DmSpec cc;
  cc.kind = DmKind::CCDM;
  cc.n = 4;
  cc.alphabet = alpha13();
  cc.composition = {2, 2};
  cc.k = 2;
  CHECK(average_sequence_energy(cc) == Catch::Approx(20.0).margin(1e-12));
}

TEST_CASE("energy ordering across DM kinds at N = 16") {
  // common feasible k at N=16 over a 4-level alphabet
  const AmplitudeAlphabet alpha{{1, 3, 5, 7}};
  const int n = 16, k = 24;

  DmSpec ss;
  ss.kind = DmKind::SS;
  ss.n = n;
  ss.k = k;
  ss.alphabet = alpha;
  DmSpec sm1 = ss;
  sm1.kind = DmKind::SM;
  sm1.shells = 1;
  DmSpec sm2 = ss;
  sm2.kind = DmKind::SM;
  sm2.shells = 2;
  DmSpec smm = ss;
  smm.kind = DmKind::SmMax;
  DmSpec cc = ss;
  cc.kind = DmKind::CCDM;
  cc.composition = ccdm_composition_for_rate(alpha.levels, n, k);

  const double e_ss = average_sequence_energy(ss);
  const double e_sm1 = average_sequence_energy(sm1);
  const double e_sm2 = average_sequence_energy(sm2);
  const double e_smm = average_sequence_energy(smm);
  const double e_cc = average_sequence_energy(cc);

  CHECK(e_cc >= e_sm1 - 1e-9);
  CHECK(e_sm1 >= e_sm2 - 1e-9);
  CHECK(e_sm2 >= e_smm - 1e-9);
  CHECK(e_smm >= e_ss - 1e-9);
  CHECK(e_cc > e_ss + 1e-6);
}

TEST_CASE("rate loss") {
  DmSpec cc;
  cc.kind = DmKind::CCDM;
  cc.n = 4;
  cc.alphabet = alpha13();
  cc.composition = {2, 2};
  cc.k = 2;
  CHECK(dm_rate_loss(cc) == Catch::Approx(0.5).margin(1e-9));

  // rate loss is non-negative for every kind
  CHECK(dm_rate_loss(ss_spec(4, 3)) >= -1e-9);

  // SS at fixed rate 3/4: non-increasing in N
  double prev = 1e9;
  for (int n : {4, 8, 16, 32, 64}) {
    const double loss = dm_rate_loss(ss_spec(n, 3 * n / 4));
    CHECK(loss <= prev + 1e-9);
    prev = loss;
  }
}

TEST_CASE("long block emulation") {
  auto spec = ss_spec(8, 6);
  const auto base = DistributionMatcher::build(spec);

  // c = 1: identity up to the (length-8) seeded permutation of one block
  const auto one = emulate_long_block(base, 1, 42, 5);
  auto sorted_one = one.amplitudes;
  std::sort(sorted_one.begin(), sorted_one.end());
  auto sorted_base = base.encode(5).amplitudes;
  std::sort(sorted_base.begin(), sorted_base.end());
  CHECK(sorted_one == sorted_base);

  // c = 2: deterministic given seed; multiset preserved
  const BigInt bits = (BigInt(37) << 6) | 11;
  const auto a = emulate_long_block(base, 2, 7, bits);
  const auto b = emulate_long_block(base, 2, 7, bits);
  CHECK(a.amplitudes == b.amplitudes);
  std::vector<int> concat;
  for (BigInt chunk : {BigInt(11), BigInt(37)}) {
    const auto blk = base.encode(chunk);
    concat.insert(concat.end(), blk.amplitudes.begin(), blk.amplitudes.end());
  }
  auto sa = a.amplitudes, sc = concat;
  std::sort(sa.begin(), sa.end());
  std::sort(sc.begin(), sc.end());
  CHECK(sa == sc);

  // emulated round trip through the DistributionMatcher interface
  spec.emulate_factor = 2;
  spec.seed = 7;
  const auto dm = DistributionMatcher::build(spec);
  CHECK(dm.decode(dm.encode(bits)) == bits);
  const auto c = dm.encode(bits);
  CHECK(c.amplitudes == a.amplitudes);
}

TEST_CASE("DmSpec record round trip") {
  DmSpec cc;
  cc.kind = DmKind::CCDM;
  cc.n = 8;
  cc.alphabet = {{1, 3, 5}};
  cc.composition = {4, 3, 1};
  cc.k = 8;
  cc.emulate_factor = 2;
  cc.seed = 99;
  const auto rec = cc.to_record();
  const auto back = DmSpec::from_record(rec);
  CHECK(back.kind == cc.kind);
  CHECK(back.n == cc.n);
  CHECK(back.k == cc.k);
  CHECK(back.alphabet.levels == cc.alphabet.levels);
  CHECK(back.composition == cc.composition);
  CHECK(back.emulate_factor == cc.emulate_factor);
  CHECK(back.seed == cc.seed);
}
