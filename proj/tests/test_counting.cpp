#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aga/analysis.hpp"
#include "aga/counting.hpp"
#include "aga/model.hpp"

using namespace aga;

namespace {

AttributedGraphPair empty_pair(int n, int m, double q) {
  AttributedGraphPair pair;
  pair.params = ModelParams{n, m, q, 0.5, q, 0.5};
  pair.g1 = AttributedGraph(n, m);
  pair.g2 = AttributedGraph(n, m);
  pair.truth = Permutation(n);
  return pair;
}

ModelParams random_params(Rng& rng, int n, int m) {
  return ModelParams{n, m, 0.1 + 0.8 * rng.next_unit(), rng.next_unit(),
                     0.1 + 0.8 * rng.next_unit(), rng.next_unit()};
}

}  // namespace

TEST_CASE("normalize") {
  ModelParams p{3, 2, 0.3, 0.5, 0.3, 0.5};
  AttributedGraph g(3, 2);
  g.add_user_edge(0, 1);
  g.add_attr_edge(2, 0);
  const auto norm = normalize(g, p);
  CHECK(norm.user_mat(0, 1) == doctest::Approx(0.7));
  CHECK(norm.user_mat(1, 0) == doctest::Approx(0.7));
  CHECK(norm.user_mat(0, 2) == doctest::Approx(-0.3));
  CHECK(norm.attr_mat(2, 0) == doctest::Approx(0.7));
  CHECK(norm.attr_mat(0, 1) == doctest::Approx(-0.3));
  for (int i = 0; i < 3; ++i) CHECK(norm.user_mat(i, i) == 0.0);

  const auto empty = normalize(AttributedGraph(3, 2), ModelParams{3, 2, 0.5, 0, 0.5, 0});
  CHECK(empty.user_mat(0, 1) == -0.5);
  CHECK(empty.attr_mat(2, 1) == -0.5);
  CHECK(empty.user_mat(2, 2) == 0.0);
}

TEST_CASE("tree_weight") {
  // Three-edge tree: (2,4) absent, (2,a0) absent, (4,a2) present.
  ModelParams p{5, 3, 0.3, 0.5, 0.2, 0.5};
  AttributedGraph g(5, 3);
  g.add_attr_edge(4, 2);
  const auto norm = normalize(g, p);
  AttributedTree tree;
  tree.user_edges = {{2, 4}};
  tree.attr_edges = {{2, 0}, {4, 2}};
  CHECK(tree_weight(tree, norm) == doctest::Approx((1.0 - 0.2) * 0.3 * 0.2));

  CHECK(tree_weight(AttributedTree{}, norm) == 1.0);  // empty product

  ModelParams q{3, 1, 0.25, 0.5, 0.25, 0.5};
  AttributedGraph h(3, 1);
  h.add_user_edge(0, 1);
  AttributedTree single;
  single.user_edges = {{0, 1}};
  CHECK(tree_weight(single, normalize(h, q)) == doctest::Approx(0.75));

  AttributedTree bad;
  bad.user_edges = {{0, 9}};
  CHECK_THROWS_AS(tree_weight(bad, norm), std::out_of_range);
}

TEST_CASE("path_weight_table") {
  SUBCASE("empty graphs at q = 0.5") {
    const auto norm = normalize(AttributedGraph(4, 2), ModelParams{4, 2, 0.5, 0, 0.5, 0});
    const auto table = path_weight_table(norm, 1);
    for (int a = 0; a < 2; ++a)
      for (int u = 0; u < 4; ++u)
        CHECK(table.weights(a, u) == (u == 1 ? 0.0 : 0.25));
  }

  SUBCASE("n=2 shape") {
    const auto norm = normalize(AttributedGraph(2, 1), ModelParams{2, 1, 0.4, 0, 0.4, 0});
    const auto table = path_weight_table(norm, 0);
    CHECK(table.weights(0, 0) == 0.0);
    CHECK(table.weights(0, 1) == doctest::Approx(0.16));
  }

  SUBCASE("matches the direct product on random graphs") {
    Rng rng(11);
    for (int inst = 0; inst < 20; ++inst) {
      const int n = 3 + static_cast<int>(rng.next_below(5));
      const int m = 1 + static_cast<int>(rng.next_below(4));
      const ModelParams p = random_params(rng, n, m);
      const auto pair = generate_pair(p, rng.next_u64());
      const auto norm = normalize(pair.g1, p);
      const int root = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
      const auto table = path_weight_table(norm, root);
      for (int a = 0; a < m; ++a)
        for (int u = 0; u < n; ++u)
          CHECK(table.weights(a, u) ==
                doctest::Approx(norm.user_mat(root, u) * norm.attr_mat(u, a)));
    }
  }
}

TEST_CASE("tree_count") {
  SUBCASE("empty graphs, n=4, k=2: hand enumeration gives 0.375") {
    const auto norm = normalize(AttributedGraph(4, 2), ModelParams{4, 2, 0.5, 0, 0.5, 0});
    const auto table = path_weight_table(norm, 0);
    const std::vector<int> attrs{0, 1};
    CHECK(tree_count(table, attrs) == doctest::Approx(0.375));
    // Partition form: 0.75^2 - 0.1875.
    CHECK(tree_count(table, attrs) == doctest::Approx(0.75 * 0.75 - 0.1875));
  }

  SUBCASE("k=1 is the plain port sum") {
    Rng rng(5);
    const ModelParams p = random_params(rng, 6, 3);
    const auto pair = generate_pair(p, 9);
    const auto norm = normalize(pair.g1, p);
    const auto table = path_weight_table(norm, 2);
    const std::vector<int> attrs{1};
    CHECK(tree_count(table, attrs) == doctest::Approx(table.weights.row(1).sum()));
  }

  SUBCASE("k > n-1 signals an error rather than returning 0") {
    const auto norm = normalize(AttributedGraph(3, 4), ModelParams{3, 4, 0.5, 0, 0.5, 0});
    const auto table = path_weight_table(norm, 0);
    const std::vector<int> attrs{0, 1, 2};
    CHECK_THROWS_AS(tree_count(table, attrs), std::invalid_argument);
  }

  SUBCASE("repeated attributes are rejected") {
    const auto norm = normalize(AttributedGraph(5, 3), ModelParams{5, 3, 0.5, 0, 0.5, 0});
    const auto table = path_weight_table(norm, 0);
    const std::vector<int> attrs{1, 1};
    CHECK_THROWS_AS(tree_count(table, attrs), std::invalid_argument);
  }
}

TEST_CASE("tree_count_bruteforce") {
  SUBCASE("family size is C(n-1,k) k!") {
    const auto norm = normalize(AttributedGraph(5, 2), ModelParams{5, 2, 0.5, 0, 0.5, 0});
    const std::vector<int> attrs{0, 1};
    CHECK(tree_count_bruteforce(norm, 0, attrs).trees == 12);  // C(4,2) 2! = 12
  }

  SUBCASE("k = n-1 enumerates (n-1)! trees") {
    const auto norm = normalize(AttributedGraph(4, 3), ModelParams{4, 3, 0.5, 0, 0.5, 0});
    const std::vector<int> attrs{0, 1, 2};
    CHECK(tree_count_bruteforce(norm, 1, attrs).trees == 6);
  }

  SUBCASE("empty graph value matches the hand computation") {
    const auto norm = normalize(AttributedGraph(4, 2), ModelParams{4, 2, 0.5, 0, 0.5, 0});
    const std::vector<int> attrs{0, 1};
    CHECK(tree_count_bruteforce(norm, 0, attrs).value == doctest::Approx(0.375));
  }

  SUBCASE("guardrail") {
    const auto norm = normalize(AttributedGraph(13, 2), ModelParams{13, 2, 0.5, 0, 0.5, 0});
    const std::vector<int> attrs{0};
    CHECK_THROWS_AS(tree_count_bruteforce(norm, 0, attrs), std::invalid_argument);
  }
}

TEST_CASE("oracle equivalence of tree_count and brute force") {
  Rng rng(2024);
  for (int inst = 0; inst < 60; ++inst) {
    const int n = 3 + static_cast<int>(rng.next_below(6));
    const int m = 1 + static_cast<int>(rng.next_below(5));
    const int k =
        1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(std::min({3, n - 1, m}))));
    const ModelParams p = random_params(rng, n, m);
    const auto pair = generate_pair(p, rng.next_u64());
    const auto norm = normalize(pair.g2, p);
    const int root = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    std::vector<int> attrs;
    for (int a = 0; a < k; ++a) attrs.push_back(a);
    const double fast = tree_count(path_weight_table(norm, root), attrs);
    const auto brute = tree_count_bruteforce(norm, root, attrs);
    CHECK(std::abs(fast - brute.value) <= 1e-9 * std::max(1.0, std::abs(brute.value)));
  }
}

TEST_CASE("similarity_matrix") {
  SUBCASE("empty graphs, n=4, m=2, k=2: single subset, both counts 0.375") {
    const auto scores = similarity_matrix(empty_pair(4, 2, 0.5), 2);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(scores(i, j) == doctest::Approx(0.140625));
  }

  SUBCASE("rho = 1 pairs score a squared norm on true pairs") {
    ModelParams p{12, 4, 0.4, 1.0, 0.4, 1.0};
    const auto pair = generate_pair(p, 3);
    const auto scores = similarity_matrix(pair, 2);
    for (int i = 0; i < p.n; ++i) CHECK(scores(i, pair.truth(i)) >= 0.0);
  }

  SUBCASE("matches the brute-force composition on random pairs") {
    Rng rng(88);
    for (int inst = 0; inst < 6; ++inst) {
      const int n = 5 + static_cast<int>(rng.next_below(3));
      const int m = 3 + static_cast<int>(rng.next_below(2));
      const int k = 2 + inst % 2;
      const ModelParams p = random_params(rng, n, m);
      const auto pair = generate_pair(p, rng.next_u64());
      const auto norm1 = normalize(pair.g1, p);
      const auto norm2 = normalize(pair.g2, p);
      Eigen::MatrixXd reference = Eigen::MatrixXd::Zero(n, n);
      std::vector<int> combo(static_cast<std::size_t>(k));
      for (int t = 0; t < k; ++t) combo[static_cast<std::size_t>(t)] = t;
      while (true) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            reference(i, j) += tree_count_bruteforce(norm1, i, combo).value *
                               tree_count_bruteforce(norm2, j, combo).value;
        int t = k - 1;
        while (t >= 0 && combo[static_cast<std::size_t>(t)] == m - k + t) --t;
        if (t < 0) break;
        ++combo[static_cast<std::size_t>(t)];
        for (int s = t + 1; s < k; ++s)
          combo[static_cast<std::size_t>(s)] = combo[static_cast<std::size_t>(s - 1)] + 1;
      }
      const auto fast = similarity_matrix(pair, k);
      CHECK((fast - reference).cwiseAbs().maxCoeff() <=
            1e-9 * std::max(1.0, reference.cwiseAbs().maxCoeff()));
    }
  }

  SUBCASE("cache budget does not change the result") {
    Rng rng(17);
    const ModelParams p = random_params(rng, 10, 6);
    const auto pair = generate_pair(p, 55);
    const auto lean = similarity_matrix(pair, 3, 0);
    const auto cached = similarity_matrix(pair, 3);
    CHECK(lean == cached);  // bitwise
  }

  SUBCASE("relabel equivariance: permuting g2 labels permutes score columns") {
    Rng rng(23);
    const ModelParams p = random_params(rng, 8, 4);
    auto pair = generate_pair(p, 12);
    const auto base = similarity_matrix(pair, 2);

    const Permutation psi = Permutation::random(p.n, rng);
    AttributedGraphPair relabeled = pair;
    relabeled.g2 = AttributedGraph(p.n, p.m);
    for (int u = 0; u < p.n; ++u) {
      for (int v = u + 1; v < p.n; ++v)
        if (pair.g2.user_edge(u, v)) relabeled.g2.add_user_edge(psi(u), psi(v));
      for (int a = 0; a < p.m; ++a)
        if (pair.g2.attr_edge(u, a)) relabeled.g2.add_attr_edge(psi(u), a);
    }
    const auto shifted = similarity_matrix(relabeled, 2);
    for (int i = 0; i < p.n; ++i)
      for (int j = 0; j < p.n; ++j)
        CHECK(shifted(i, psi(j)) == doctest::Approx(base(i, j)).epsilon(1e-12));
  }

  SUBCASE("k out of range") {
    const auto pair = empty_pair(4, 2, 0.5);
    CHECK_THROWS_AS(similarity_matrix(pair, 0), std::invalid_argument);
    CHECK_THROWS_AS(similarity_matrix(pair, 3), std::invalid_argument);
  }
}

TEST_CASE("threshold_tau") {
  ModelParams p{4, 2, 0.5, 0.8, 0.5, 0.8};
  CHECK(threshold_tau(p, 2, 0.5) == doctest::Approx(0.0048));

  ModelParams zero = p;
  zero.rho_u = 0.0;
  CHECK(threshold_tau(zero, 2, 0.5) == 0.0);

  // Definitional consistency with the expected score.
  ModelParams big{300, 40, 0.3, 0.7, 0.2, 0.6};
  const double e = expected_similarity(big, 3);
  CHECK(std::abs(threshold_tau(big, 3, 0.25) / e - 0.25) <= 1e-12);

  CHECK_THROWS_AS(threshold_tau(p, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(threshold_tau(p, 2, 1.0), std::invalid_argument);
}

TEST_CASE("select_mutual_unique policy") {
  SUBCASE("no pair above tau gives the empty alignment") {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(3, 3);
    const auto out = select_mutual_unique(scores, 1.0);
    CHECK(out.matched.empty());
    CHECK(out.conflicts.empty());
  }

  SUBCASE("clean diagonal matches everyone") {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(3, 3);
    scores.diagonal().setConstant(2.0);
    const auto out = select_mutual_unique(scores, 1.0);
    CHECK(out.matched == std::vector<int>{0, 1, 2});
    for (int i = 0; i < 3; ++i) CHECK(out.map.at(i) == i);
  }

  SUBCASE("two rows claiming one column are both dropped") {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(3, 3);
    scores(0, 2) = 2.0;
    scores(1, 2) = 2.0;
    const auto out = select_mutual_unique(scores, 1.0);
    CHECK(out.matched.empty());
    CHECK(out.conflicts == std::vector<int>{0, 1});
  }

  SUBCASE("a row with two qualifying columns is dropped") {
    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(2, 2);
    scores(0, 0) = scores(0, 1) = 2.0;
    const auto out = select_mutual_unique(scores, 1.0);
    CHECK(out.matched.empty());
    CHECK(out.conflicts == std::vector<int>{0});
  }
}

TEST_CASE("partial alignment json round trip") {
  PartialAlignment partial;
  partial.matched = {1, 4};
  partial.map = {{1, 3}, {4, 0}};
  partial.conflicts = {2};
  const std::string json = partial_alignment_to_json(partial);
  CHECK(json == R"({"matched":[1,4],"map":{"1":"3","4":"0"},"conflicts":[2]})");
  const auto back = partial_alignment_from_json(json, 5);
  CHECK(back.matched == partial.matched);
  CHECK(back.map == partial.map);
  CHECK(back.conflicts == partial.conflicts);
}

TEST_CASE("align_by_counting output is always consistent") {
  Rng rng(31);
  for (int inst = 0; inst < 10; ++inst) {
    const ModelParams p = random_params(rng, 10, 4);
    const auto pair = generate_pair(p, rng.next_u64());
    const auto out = align_by_counting(pair, 2, 0.5);
    CHECK_NOTHROW(out.validate(p.n));  // injective map, conflicts disjoint
  }
}
