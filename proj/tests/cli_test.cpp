#include <gtest/gtest.h>

#include <cstdio>
#include <sstream>
#include <sys/wait.h>

#include "treelift/rng.hpp"
#include "treelift/schreier.hpp"

namespace treelift {
namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string line = std::string(TREELIFT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(line.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::vector<Portrait> read_sample(const std::string& text, std::uint64_t& seed) {
  std::istringstream is(text);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# treelift sample v1");
  std::string word;
  is >> word >> seed;
  EXPECT_EQ(word, "seed");
  std::vector<Portrait> out;
  while (is >> std::ws && is.peek() == 'p') out.push_back(read_portrait(is));
  return out;
}

TEST(CliTest, DepthZeroGivesTrivialPortraits) {
  const auto r = cli("sample --depth 0 --rank 3 --seeds 4");
  ASSERT_EQ(r.status, 0);
  std::uint64_t seed = 0;
  const auto gens = read_sample(r.out, seed);
  EXPECT_EQ(seed, 4u);
  ASSERT_EQ(gens.size(), 3u);
  for (const auto& g : gens) EXPECT_TRUE(g.is_identity());
}

TEST(CliTest, SampleRoundTrip) {
  const auto r = cli("sample --depth 5 --rank 2 --group sym --arity 3 --seeds 9");
  ASSERT_EQ(r.status, 0);
  std::uint64_t seed = 0;
  const auto gens = read_sample(r.out, seed);
  auto rng = derive_stream(9, 0);
  const auto h = PermGroup::symmetric(3);
  ASSERT_EQ(gens.size(), 2u);
  for (const auto& g : gens) {
    EXPECT_EQ(g, sample_haar(h, TreeShape(3, 5), rng));
    EXPECT_EQ(parse_portrait(serialize(g)), g);
  }
}

TEST(CliTest, SingleGeneratorTowerCountsCycles) {
  const auto r = cli("tower --rank 1 --depth 7 --seeds 3");
  ASSERT_EQ(r.status, 0);
  auto rng = derive_stream(3, 0);
  const auto g = sample_haar(PermGroup::cyclic(2), TreeShape(2, 7), rng);
  std::ostringstream want;
  want << "# treelift tower v1\nseed,n,components,stable_from\n";
  std::vector<std::size_t> cycles;
  for (int n = 1; n <= 7; ++n) {
    const auto a = level_action(g, n);
    std::vector<bool> seen(a.size(), false);
    std::size_t c = 0;
    for (std::uint32_t v = 0; v < a.size(); ++v) {
      if (seen[v]) continue;
      ++c;
      for (auto u = v; !seen[u]; u = a[u]) seen[u] = true;
    }
    cycles.push_back(c);
  }
  std::size_t from = cycles.size();
  while (from > 0 && cycles[from - 1] == cycles.back()) --from;
  for (std::size_t n = 0; n < cycles.size(); ++n) want << "3," << n + 1 << ',' << cycles[n] << ',' << from + 1 << '\n';
  EXPECT_EQ(r.out, want.str());
}

TEST(CliTest, ExitCodes) {
  EXPECT_EQ(cli("tower --words 'x1 x3' --depth 3").status, 2);
  EXPECT_EQ(cli("tower --words 'x1 y2' --depth 3").status, 2);
  EXPECT_EQ(cli("tower --group nope").status, 2);
  EXPECT_EQ(cli("tower --seeds 5-2").status, 2);
  EXPECT_EQ(cli("--depth 3").status, 2);
  EXPECT_EQ(cli("spectra --rank 3 --depth 5 --seeds 1 --min-gap 0.99").status, 1);
  EXPECT_EQ(cli("spectra --rank 3 --depth 5 --seeds 1 --min-gap 0.01").status, 0);
  EXPECT_EQ(cli("resolve --words 'x1 x2, x2 x1' --samples 100 --depth 8").status, 2);  // too few samples
  EXPECT_EQ(cli("resolve --words 'x1 x2, x1 x2' --depth 8").status, 2);              // cyclic
  EXPECT_EQ(cli("hausdorff --depth 9 --rank 3 --budget 64").status, 1);
}

TEST(CliTest, EmptySeedListIsEmptyReport) {
  for (const std::string cmd : {"sample", "tower", "spectra", "hausdorff"}) {
    const auto r = cli(cmd + " --seeds ''");
    EXPECT_EQ(r.status, 0) << cmd;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), cmd == "sample" ? 1 : 2) << cmd;
  }
  const auto r = cli("resolve --seeds ''");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\"runs\": []"), std::string::npos);
}

TEST(CliTest, ConfigFileMirrorsFlags) {
  const std::string path = "cli_test_config.json";
  FILE* f = fopen(path.c_str(), "w");
  ASSERT_TRUE(f);
  fputs("{\"depth\": 6, \"words\": \"x1 x2, x2 x1\", \"seeds\": [1, 2]}\n", f);
  fclose(f);
  const auto from_file = cli("tower --config " + path);
  const auto from_flags = cli("tower --depth 6 --words 'x1 x2, x2 x1' --seeds 1,2");
  std::remove(path.c_str());
  EXPECT_EQ(from_file.status, 0);
  EXPECT_EQ(from_file.out, from_flags.out);
}

TEST(CliTest, ResolveReportShape) {
  const auto r = cli("resolve --words 'x1 x2, x2 x1' --depth 10 --K 1 --trunc 1 --samples 100 --seeds 1-4");
  ASSERT_EQ(r.status, 0);
  for (const char* key : {"\"format\": \"treelift-resolve/1\"", "\"N\"", "\"v\"", "\"alpha_words\"",
                          "\"marked_edges\"", "\"haar_test\"", "\"cells\": 2", "\"chi2\"", "\"p\""})
    EXPECT_NE(r.out.find(key), std::string::npos) << key;
}

}  // namespace
}  // namespace treelift
