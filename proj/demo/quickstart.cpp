// Builds a small synthetic corpus in memory, fuses LPQ and HAAR features with
// z-score normalization and compares KNN against an RBF SVM on the result.
#include <cstdio>
#include <vector>

#include "veintex/classify/knn.hpp"
#include "veintex/classify/svm.hpp"
#include "veintex/dataset.hpp"
#include "veintex/eval.hpp"
#include "veintex/features/extract.hpp"
#include "veintex/fusion.hpp"
#include "veintex/synthetic.hpp"

using namespace veintex;

namespace {

std::vector<std::vector<double>> rows(const LabeledDataset<FeatureVector>& ds) {
    std::vector<std::vector<double>> out;
    for (const auto& v : ds.payloads) out.push_back(v.values);
    return out;
}

std::vector<std::size_t> label_indices(const LabeledDataset<FeatureVector>& ds) {
    std::vector<std::size_t> out;
    for (const auto& r : ds.records) out.push_back(ds.label_of(r.subject_id));
    return out;
}

} // namespace

int main() {
    SyntheticCorpusOptions opt;
    opt.classes = 8;
    opt.samples_per_class = 6;
    opt.size = 96;
    opt.seed = 3;
    const auto corpus = make_synthetic_corpus(opt);
    const auto [train_img, test_img] = split_dataset(corpus, SplitSpec::fraction(0.5));

    DescriptorSpec lpq, haar;
    lpq.kind = Descriptor::lpq;
    haar.kind = Descriptor::haar;
    const FeatureExtractor lpq_x(lpq, opt.size, opt.size), haar_x(haar, opt.size, opt.size);
    const auto lpq_train = map_payloads(train_img, lpq_x), lpq_test = map_payloads(test_img, lpq_x);
    const auto haar_train = map_payloads(train_img, haar_x), haar_test = map_payloads(test_img, haar_x);

    // Normalization statistics come from the training side only.
    const FusedSchema schema{{{Descriptor::lpq, fit_zscore(rows(lpq_train))}, {Descriptor::haar, fit_zscore(rows(haar_train))}}};
    auto fuse = [&](const LabeledDataset<FeatureVector>& a, const LabeledDataset<FeatureVector>& b) {
        std::vector<std::vector<double>> out;
        for (std::size_t i = 0; i < a.size(); ++i) out.push_back(fuse_concat(schema, {&a.payloads[i], &b.payloads[i]}).values);
        return out;
    };
    const auto train_x = fuse(lpq_train, haar_train), test_x = fuse(lpq_test, haar_test);
    const auto train_y = label_indices(lpq_train), test_y = label_indices(lpq_test);
    std::printf("fused dimension: %zu, train %zu, test %zu\n", schema.total_dim(), train_x.size(), test_x.size());

    const KnnModel knn(3, DistanceMetric::euclidean, train_x, train_y, corpus.class_set.size());
    const auto svm = svm_train(train_x, train_y, corpus.class_set, KernelSpec::rbf(sigma_median_heuristic(train_x)));

    std::vector<std::size_t> knn_pred, svm_pred;
    for (const auto& q : test_x) {
        knn_pred.push_back(knn_predict(knn, q));
        svm_pred.push_back(svm_predict(svm, q));
    }
    const auto knn_prf = precision_recall_f(confusion_matrix(test_y, knn_pred, corpus.class_set));
    const auto svm_cm = confusion_matrix(test_y, svm_pred, corpus.class_set);
    const auto svm_prf = precision_recall_f(svm_cm);
    std::printf("KNN (k=3, euclidean): rate %.2f%%  F %.3f\n",
                recognition_rate(confusion_matrix(test_y, knn_pred, corpus.class_set)), knn_prf.macro_f);
    std::printf("SVM (rbf):            rate %.2f%%  F %.3f\n", recognition_rate(svm_cm), svm_prf.macro_f);
    return 0;
}
