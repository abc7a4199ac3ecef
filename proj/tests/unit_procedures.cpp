#include <catch2/catch_amalgamated.hpp>

#include "mcmt/procedures.hpp"
#include "mcmt/montecarlo.hpp"
#include "mcmt/rng.hpp"

using namespace mcmt;
using Catch::Matchers::WithinAbs;

namespace {

KnowledgeVector all_decided(std::initializer_list<std::size_t> cells) {
    KnowledgeVector k;
    for (auto c : cells) k.push_back(Classification::decided(c));
    return k;
}

// Every knowledge vector over {Decided(0..cells-1), Undecided}^m.
std::vector<KnowledgeVector> all_knowledge_vectors(std::size_t m, std::size_t cells) {
    std::vector<KnowledgeVector> out;
    const std::size_t choices = cells + 1;
    std::vector<std::size_t> pick(m, 0);
    while (true) {
        KnowledgeVector k(m);
        for (std::size_t i = 0; i < m; ++i)
            k[i] = pick[i] < cells ? Classification::decided(pick[i])
                                   : Classification::undecided();
        out.push_back(std::move(k));
        std::size_t pos = 0;
        while (pos < m && ++pick[pos] == choices) pick[pos++] = 0;
        if (pos == m) break;
    }
    return out;
}

} // namespace

namespace {
void check_thresholds(const std::vector<double>& got, const std::vector<double>& want) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK_THAT(got[i], WithinAbs(want[i], 1e-15));
}
} // namespace

TEST_CASE("procedure thresholds") {
    check_thresholds(procedure_thresholds({ProcedureKind::BenjaminiHochberg, 0.1, 4}),
                     {0.025, 0.05, 0.075, 0.1});
    check_thresholds(procedure_thresholds({ProcedureKind::Bonferroni, 0.1, 4}), {0.025});
    check_thresholds(procedure_thresholds({ProcedureKind::Holm, 0.1, 2}), {0.05, 0.1});
}

TEST_CASE("evaluate_exact") {
    const ProcedureSpec bh{ProcedureKind::BenjaminiHochberg, 0.1, 4};
    CHECK(evaluate_exact(bh, {0.01, 0.02, 0.03, 0.2})
          == std::vector<bool>{true, true, true, false});

    for (auto kind : {ProcedureKind::Bonferroni, ProcedureKind::BenjaminiHochberg,
                      ProcedureKind::Holm}) {
        const ProcedureSpec spec{kind, 0.1, 5};
        CHECK(evaluate_exact(spec, std::vector<double>(5, 0.0))
              == std::vector<bool>(5, true));
        CHECK(evaluate_exact(spec, std::vector<double>(5, 1.0))
              == std::vector<bool>(5, false));
    }
    CHECK_THROWS_AS(evaluate_exact(bh, {0.1, 0.2, 0.3, 1.5}), std::invalid_argument);
}

TEST_CASE("bh rejection count is antitone in the p-values") {
    const ProcedureSpec bh{ProcedureKind::BenjaminiHochberg, 0.1, 6};
    RngStream rng(StreamSeed{21, 0, 0});
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> p(6);
        for (auto& v : p) v = rng.next_double();
        auto bumped = p;
        const auto i = std::size_t(rng.next_double() * 6);
        bumped[i] = std::min(1.0, bumped[i] + rng.next_double() * (1.0 - bumped[i]));
        const auto r0 = evaluate_exact(bh, p);
        const auto r1 = evaluate_exact(bh, bumped);
        REQUIRE(std::count(r1.begin(), r1.end(), true)
                <= std::count(r0.begin(), r0.end(), true));
    }
}

TEST_CASE("partial decisions: all below the first threshold forces rejection") {
    const ProcedureSpec bh{ProcedureKind::BenjaminiHochberg, 0.1, 3};
    const auto part = partition_for(bh);
    const auto state = partial_decisions(bh, all_decided({0, 0, 0}), part);
    CHECK(state.forced_reject_count() == 3);
    CHECK(state.undecided_count() == 0);
}

TEST_CASE("partial decisions: undecided top straddler blocks everything") {
    // Two hypotheses inside [a2, a3), the third unknown: nothing can be
    // decided until the unknown resolves against the top threshold.
    const ProcedureSpec bh{ProcedureKind::BenjaminiHochberg, 0.1, 3};
    const auto part = partition_for(bh);
    KnowledgeVector k = {Classification::decided(2), Classification::decided(2),
                         Classification::undecided()};
    for (auto bound : {CellBound::Closed, CellBound::Interior}) {
        const auto state = partial_decisions(bh, k, part, bound);
        CHECK(state.undecided_count() == 3);
    }
}

TEST_CASE("single undecided hypothesis under bonferroni") {
    const ProcedureSpec bo{ProcedureKind::Bonferroni, 0.1, 1};
    const auto part = partition_for(bo);
    const KnowledgeVector k = {Classification::undecided()};
    CHECK(partial_decisions(bo, k, part).undecided_count() == 1);
    CHECK(brute_force_decisions(bo, k, part).undecided_count() == 1);
}

TEST_CASE("partial decisions agree with the exhaustive oracle") {
    for (auto kind : {ProcedureKind::Bonferroni, ProcedureKind::BenjaminiHochberg,
                      ProcedureKind::Holm}) {
        for (std::size_t m : {2u, 3u}) {
            const ProcedureSpec spec{kind, 0.1, m};
            const auto part = partition_for(spec);
            for (const auto& k : all_knowledge_vectors(m, part.cell_count()))
                for (auto bound : {CellBound::Closed, CellBound::Interior}) {
                    const auto fast = partial_decisions(spec, k, part, bound);
                    const auto slow = brute_force_decisions(spec, k, part, bound);
                    REQUIRE(fast == slow);
                }
        }
    }
}

TEST_CASE("partial decisions agree with the oracle on random instances") {
    RngStream rng(StreamSeed{23, 0, 0});
    for (int trial = 0; trial < 1500; ++trial) {
        const std::size_t m = 4 + std::size_t(rng.next_double() * 2);
        const auto kind = std::array{ProcedureKind::Bonferroni,
                                     ProcedureKind::BenjaminiHochberg,
                                     ProcedureKind::Holm}[std::size_t(rng.next_double() * 3)];
        const ProcedureSpec spec{kind, 0.1, m};
        const auto part = partition_for(spec);
        KnowledgeVector k(m);
        for (auto& c : k) {
            const double u = rng.next_double();
            c = u < 0.3 ? Classification::undecided()
                        : Classification::decided(
                              std::size_t(rng.next_double() * double(part.cell_count())));
        }
        const auto bound = rng.next_double() < 0.5 ? CellBound::Closed : CellBound::Interior;
        REQUIRE(partial_decisions(spec, k, part, bound)
                == brute_force_decisions(spec, k, part, bound));
    }
}

TEST_CASE("refining knowledge never unforces a decision") {
    RngStream rng(StreamSeed{29, 0, 0});
    for (int trial = 0; trial < 800; ++trial) {
        const ProcedureSpec spec{ProcedureKind::BenjaminiHochberg, 0.1, 5};
        const auto part = partition_for(spec);
        KnowledgeVector k(5);
        bool any_undecided = false;
        for (auto& c : k) {
            if (rng.next_double() < 0.4) {
                c = Classification::undecided();
                any_undecided = true;
            } else {
                c = Classification::decided(
                    std::size_t(rng.next_double() * double(part.cell_count())));
            }
        }
        if (!any_undecided) continue;
        const auto before = partial_decisions(spec, k, part);
        auto refined = k;
        for (auto& c : refined)
            if (!c.is_decided) {
                c = Classification::decided(
                    std::size_t(rng.next_double() * double(part.cell_count())));
                break;
            }
        const auto after = partial_decisions(spec, refined, part);
        for (std::size_t i = 0; i < 5; ++i) {
            if (before.status[i] == DecisionStatus::ForcedReject)
                REQUIRE(after.status[i] == DecisionStatus::ForcedReject);
            if (before.status[i] == DecisionStatus::ForcedAccept)
                REQUIRE(after.status[i] == DecisionStatus::ForcedAccept);
        }
    }
}

TEST_CASE("interior knowledge with nothing masked forces every decision") {
    RngStream rng(StreamSeed{31, 0, 0});
    for (int trial = 0; trial < 400; ++trial) {
        const auto kind = std::array{ProcedureKind::Bonferroni,
                                     ProcedureKind::BenjaminiHochberg,
                                     ProcedureKind::Holm}[std::size_t(rng.next_double() * 3)];
        const ProcedureSpec spec{kind, 0.1, 5};
        const auto part = partition_for(spec);
        std::vector<double> p(5);
        KnowledgeVector k(5);
        std::vector<double> representative(5);
        for (std::size_t i = 0; i < 5; ++i) {
            p[i] = rng.next_double();
            const auto cell = part.cell_of(p[i]);
            k[i] = Classification::decided(cell);
            representative[i] = 0.5 * (part.cell_left(cell) + part.cell_right(cell));
        }
        const auto state = partial_decisions(spec, k, part, CellBound::Interior);
        REQUIRE(state.undecided_count() == 0);
        const auto exact = evaluate_exact(spec, representative);
        for (std::size_t i = 0; i < 5; ++i)
            REQUIRE((state.status[i] == DecisionStatus::ForcedReject) == bool(exact[i]));
    }
}

TEST_CASE("undecided count experiment") {
    const ProcedureSpec bh{ProcedureKind::BenjaminiHochberg, 0.1, 6};
    RngStream rng(StreamSeed{37, 0, 0});
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(6);
        for (auto& v : p) v = rng.next_double();
        CHECK(undecided_count_experiment(bh, p, 0) == 0);
        CHECK(undecided_count_experiment(bh, p, 6) <= 6);
    }
    CHECK_THROWS_AS(undecided_count_experiment(bh, std::vector<double>(6, 0.5), 7),
                    std::invalid_argument);
}

TEST_CASE("straddling p-vector with the largest value masked blocks all decisions") {
    for (std::size_t m : {3u, 5u}) {
        const ProcedureSpec bh{ProcedureKind::BenjaminiHochberg, 0.1, m};
        const auto part = partition_for(bh);
        const auto& thr = part.thresholds();
        const double eta = (thr.back() - thr[thr.size() - 2]) / 8.0;
        const auto prior = PriorSpec::straddle_top(part, eta);
        for (std::uint64_t rep = 0; rep < 50; ++rep) {
            const auto p = sample_prior(prior, m, StreamSeed{101, rep, m});
            REQUIRE(*std::max_element(p.begin(), p.end()) == p.back());
            // mask exactly the largest (smallest-D by construction)
            CHECK(undecided_count_experiment(bh, p, 1) == m);
            CHECK(undecided_count_experiment(bh, p, 1, CellBound::Closed) == m);
        }
    }
}
