#include <doctest.h>

#include "rsmt/dataset.hpp"
#include "rsmt/error.hpp"
#include "rsmt/evaluation.hpp"

using namespace rsmt;

TEST_CASE("confusion counts") {
    const std::vector<std::uint8_t> labels{0, 1, 1, 0, 0};
    CHECK(confusion_counts(std::vector<int>{1, 2}, labels) == ConfusionCounts{2, 0, 0});
    CHECK(confusion_counts(std::vector<int>{}, labels) == ConfusionCounts{0, 0, 2});
    CHECK(confusion_counts(std::vector<int>{0, 1}, std::vector<std::uint8_t>{0, 1, 1}) == ConfusionCounts{1, 1, 1});
    CHECK_THROWS_AS(confusion_counts(std::vector<int>{7}, labels), Error);
}

TEST_CASE("net accuracy") {
    CHECK(net_accuracy({0, 0, 0}) == 1.0);
    CHECK(net_accuracy({3, 1, 0}) == 0.75);
    CHECK(net_accuracy({0, 2, 1}) == 0.0);
}

TEST_CASE("quartiles and outliers") {
    CHECK(outlier_count(std::vector<double>{}) == 0);
    CHECK(outlier_count(std::vector<double>{2, 2, 2, 2}) == 0);
    // q1 = q3 = 1 by interpolation at positions 1 and 3
    CHECK(outlier_count(std::vector<double>{1, 1, 1, 1, 100}) == 1);
    const std::vector<double> s{1, 2, 3, 4};
    CHECK(quantile(s, 0.25) == doctest::Approx(1.75));
    CHECK(quantile(s, 0.5) == doctest::Approx(2.5));
    CHECK(quantile(s, 0.75) == doctest::Approx(3.25));
}

TEST_CASE("degree bins") {
    CHECK(degree_bin_label(3) == "3");
    CHECK(degree_bin_label(9) == "9");
    CHECK(degree_bin_label(14) == "10-19");
    CHECK(degree_bin_label(77) == "50-99");
    CHECK(degree_bin_label(150) == ">=100");
}

TEST_CASE("oracle predictions evaluate perfectly") {
    const std::vector<std::size_t> degrees{3, 4, 5, 6};
    const Dataset d = label_dataset(generate_dataset(degrees, 10, 9), {}, 2);
    const EvalReport r = evaluate_predictions(d, oracle_predictions(d), 2);
    CHECK(r.average_accuracy == 1.0);
    CHECK(r.suboptimal_rate == 0.0);
    CHECK(!r.wl_increase);
    CHECK(r.outlier_count == 0);
    CHECK(r.degree_bins.size() == 4);

    Dataset unlabeled = d;
    unlabeled[3].labels.reset();
    CHECK_THROWS_AS(evaluate_predictions(unlabeled, oracle_predictions(d), 1), Error);
    const auto preds = oracle_predictions(d);
    CHECK_THROWS_AS(evaluate_predictions(d, std::span(preds).first(2), 1), Error);
}

TEST_CASE("hand-computed four-net report") {
    // 1: exact prediction. 2: a spurious on-path pick, same WL, accuracy
    // overridden to 1. 3 and 4: nothing selected where the oracle needs a
    // Steiner point.
    Dataset d;
    d.push_back({Net(1, {{0, 0}, {2, 0}, {1, 2}}), {}, {}});             // opt 4, MST 5
    d.push_back({Net(2, {{3, 0}, {5, 6}, {1, 6}, {2, 0}}), {}, {}});     // opt 11 via (2,6); (3,6) ties
    d.push_back({Net(3, {{0, 0}, {4, 0}, {2, 4}}), {}, {}});             // opt 8, MST 10
    d.push_back({Net(4, {{0, 0}, {10, 10}, {0, 10}, {10, 0}}), {}, {}});  // opt 30 = MST
    d = label_dataset(d, {}, 1);
    CHECK(*d[0].wl_opt == 4);
    CHECK(*d[1].wl_opt == 11);
    CHECK(build_hanan_grid(d[1].net).nodes[static_cast<std::size_t>(d[1].labels->at(0))].point == Point{2, 6});
    CHECK(*d[2].wl_opt == 8);
    CHECK(*d[3].wl_opt == 30);

    std::vector<SteinerPrediction> preds;
    for (const auto& r : d) {
        const HananGrid g = build_hanan_grid(r.net);
        std::vector<double> p(g.size(), 0.0);
        if (r.net.id() == 1) {
            for (int i : *r.labels) p[static_cast<std::size_t>(i)] = 0.9;
        }
        if (r.net.id() == 2) p[static_cast<std::size_t>(g.index_of(2, 1))] = 0.9;  // (3,6)
        preds.push_back(select_steiner(g, std::move(p), 0.5));
    }
    const EvalReport rep = evaluate_predictions(d, preds, 1);
    REQUIRE(rep.nets.size() == 4);
    CHECK(rep.nets[0].accuracy == 1.0);
    CHECK(rep.nets[1].wl == 11);
    CHECK(rep.nets[1].accuracy == 1.0);  // tp 0, fp 1, fn 1 but equal wirelength
    CHECK(rep.nets[2].accuracy == 0.0);
    CHECK(rep.nets[2].wl == 10);
    CHECK(rep.nets[3].accuracy == 1.0);
    CHECK(rep.average_accuracy == 0.75);
    CHECK(rep.suboptimal_rate == 0.25);
    REQUIRE(rep.wl_increase);
    CHECK(rep.wl_increase->mean == 0.25);
    CHECK(rep.wl_increase->min == 0.25);
    CHECK(rep.wl_increase->max == 0.25);
    CHECK(rep.outlier_count == 0);

    const std::string csv = report_csv(rep);
    CHECK(csv.rfind("net_id,degree,accuracy,wl,wl_opt,wl_increase,refined_flag\n", 0) == 0);
    CHECK(csv.find("\n3,3,0,10,8,0.25,0\n") != std::string::npos);
    CHECK(format_report(rep).find("Average accuracy     75.000%") != std::string::npos);
}
