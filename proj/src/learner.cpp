#include "camp/learner.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace camp {

Classifier::Classifier(int input_dim, int num_classes, std::vector<int> hidden, std::uint64_t seed)
    : input_dim_(input_dim), num_classes_(num_classes) {
    if (input_dim < 1 || num_classes < 1) throw std::invalid_argument("classifier dimensions must be positive");
    sizes_.push_back(input_dim);
    sizes_.insert(sizes_.end(), hidden.begin(), hidden.end());
    sizes_.push_back(num_classes);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const int fan_in = sizes_[l], fan_out = sizes_[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> init(-limit, limit);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = init(rng);
        weights_.push_back(std::move(w));
        biases_.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    mean_ = Eigen::VectorXd::Zero(input_dim);
    scale_ = Eigen::VectorXd::Ones(input_dim);
}

void Classifier::set_normalization(std::vector<double> mean, std::vector<double> scale) {
    if (static_cast<int>(mean.size()) != input_dim_ || static_cast<int>(scale.size()) != input_dim_)
        throw std::invalid_argument("normalisation size mismatch");
    mean_ = Eigen::Map<Eigen::VectorXd>(mean.data(), input_dim_);
    scale_ = Eigen::Map<Eigen::VectorXd>(scale.data(), input_dim_);
}

Eigen::MatrixXd Classifier::normalize(const std::vector<std::vector<double>>& X) const {
    Eigen::MatrixXd input(input_dim_, static_cast<Eigen::Index>(X.size()));
    for (std::size_t n = 0; n < X.size(); ++n) {
        if (static_cast<int>(X[n].size()) != input_dim_)
            throw std::invalid_argument("feature dimension " + std::to_string(X[n].size()) + " != " +
                                        std::to_string(input_dim_));
        for (int d = 0; d < input_dim_; ++d)
            input(d, static_cast<Eigen::Index>(n)) = (X[n][static_cast<std::size_t>(d)] - mean_(d)) / scale_(d);
    }
    return input;
}

Eigen::MatrixXd Classifier::forward(const Eigen::MatrixXd& input, std::vector<Eigen::MatrixXd>* activations) const {
    Eigen::MatrixXd a = input;
    if (activations) activations->push_back(a);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = weights_[l] * a;
        z.colwise() += biases_[l];
        if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
        if (activations) activations->push_back(a);
    }
    return a;
}

Eigen::VectorXd Classifier::scores(const std::vector<double>& x) const { return forward(normalize({x}), nullptr).col(0); }

int Classifier::predict(const std::vector<double>& x) const {
    Eigen::VectorXd s = scores(x);
    int best = 0;
    for (int k = 1; k < s.size(); ++k)
        if (s(k) > s(best)) best = k;
    return best;
}

namespace {

// Column-wise log-softmax.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out = logits;
    for (Eigen::Index n = 0; n < logits.cols(); ++n) {
        double m = logits.col(n).maxCoeff();
        double lse = m + std::log((logits.col(n).array() - m).exp().sum());
        out.col(n).array() -= lse;
    }
    return out;
}

}  // namespace

double Classifier::loss(const std::vector<std::vector<double>>& X, const std::vector<int>& Y) const {
    return loss_and_gradient(X, Y).first;
}

std::pair<double, std::vector<double>> Classifier::loss_and_gradient(const std::vector<std::vector<double>>& X,
                                                                     const std::vector<int>& Y) const {
    if (X.size() != Y.size() || X.empty()) throw std::invalid_argument("dataset sizes differ or are empty");
    std::vector<Eigen::MatrixXd> acts;
    Eigen::MatrixXd logits = forward(normalize(X), &acts);
    Eigen::MatrixXd logp = log_softmax(logits);
    const double N = static_cast<double>(X.size());
    double loss = 0.0;
    Eigen::MatrixXd delta = logp.array().exp().matrix();
    for (std::size_t n = 0; n < Y.size(); ++n) {
        if (Y[n] < 0 || Y[n] >= num_classes_) throw std::invalid_argument("class index out of range");
        loss -= logp(Y[n], static_cast<Eigen::Index>(n));
        delta(Y[n], static_cast<Eigen::Index>(n)) -= 1.0;
    }
    loss /= N;
    delta /= N;

    std::vector<Eigen::MatrixXd> grad_w(weights_.size());
    std::vector<Eigen::VectorXd> grad_b(weights_.size());
    for (std::size_t l = weights_.size(); l-- > 0;) {
        grad_w[l] = delta * acts[l].transpose();
        grad_b[l] = delta.rowwise().sum();
        if (l > 0) delta = (weights_[l].transpose() * delta).cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
    std::vector<double> flat;
    flat.reserve(num_parameters());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), grad_w[l].data(), grad_w[l].data() + grad_w[l].size());
        flat.insert(flat.end(), grad_b[l].data(), grad_b[l].data() + grad_b[l].size());
    }
    return {loss, flat};
}

std::size_t Classifier::num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
    return n;
}

std::vector<double> Classifier::parameters() const {
    std::vector<double> flat;
    flat.reserve(num_parameters());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.insert(flat.end(), weights_[l].data(), weights_[l].data() + weights_[l].size());
        flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
    }
    return flat;
}

void Classifier::set_parameters(const std::vector<double>& params) {
    if (params.size() != num_parameters()) throw std::invalid_argument("parameter count mismatch");
    std::size_t k = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        for (Eigen::Index i = 0; i < weights_[l].size(); ++i) weights_[l].data()[i] = params[k++];
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i) biases_[l].data()[i] = params[k++];
    }
}

void Classifier::save(std::ostream& out) const {
    out << "camp-classifier 1\n" << sizes_.size();
    for (int s : sizes_) out << ' ' << s;
    out << '\n';
    out.precision(17);
    for (int d = 0; d < input_dim_; ++d) out << mean_(d) << (d + 1 < input_dim_ ? ' ' : '\n');
    for (int d = 0; d < input_dim_; ++d) out << scale_(d) << (d + 1 < input_dim_ ? ' ' : '\n');
    auto params = parameters();
    out << params.size() << '\n';
    for (std::size_t i = 0; i < params.size(); ++i) out << params[i] << (i + 1 < params.size() ? ' ' : '\n');
}

Classifier Classifier::load(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "camp-classifier" || version != 1) throw std::invalid_argument("not a classifier file");
    std::size_t n_layers = 0;
    in >> n_layers;
    if (n_layers < 2) throw std::invalid_argument("classifier file has too few layers");
    std::vector<int> sizes(n_layers);
    for (auto& s : sizes) in >> s;
    Classifier clf(sizes.front(), sizes.back(), std::vector<int>(sizes.begin() + 1, sizes.end() - 1));
    std::vector<double> mean(static_cast<std::size_t>(clf.input_dim_)), scale(mean.size());
    for (auto& m : mean) in >> m;
    for (auto& s : scale) in >> s;
    clf.set_normalization(mean, scale);
    std::size_t count = 0;
    in >> count;
    std::vector<double> params(count);
    for (auto& p : params) in >> p;
    if (!in) throw std::invalid_argument("truncated classifier file");
    clf.set_parameters(params);
    return clf;
}

TrainResult train_classifier(const std::vector<std::vector<double>>& X, const std::vector<int>& Y, int num_classes,
                             const TrainOptions& options, std::uint64_t seed) {
    if (X.empty() || X.size() != Y.size()) throw std::invalid_argument("training set must be non-empty and aligned");
    const int dim = static_cast<int>(X.front().size());
    TrainResult result;
    result.classifier = Classifier(dim, num_classes, options.hidden, seed);
    Classifier& clf = result.classifier;

    if (options.standardize) {
        std::vector<double> mean(static_cast<std::size_t>(dim), 0.0), scale(static_cast<std::size_t>(dim), 0.0);
        for (const auto& x : X)
            for (int d = 0; d < dim; ++d) mean[static_cast<std::size_t>(d)] += x.at(static_cast<std::size_t>(d)) / X.size();
        for (const auto& x : X)
            for (int d = 0; d < dim; ++d) {
                double diff = x[static_cast<std::size_t>(d)] - mean[static_cast<std::size_t>(d)];
                scale[static_cast<std::size_t>(d)] += diff * diff / X.size();
            }
        for (auto& s : scale) s = s > 1e-12 ? std::sqrt(s) : 1.0;
        clf.set_normalization(mean, scale);
    }

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> params = clf.parameters();
    std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
    double lr = options.learning_rate;
    long step = 0;

    auto [loss, grad] = clf.loss_and_gradient(X, Y);
    if (!std::isfinite(loss)) throw TrainingDiverged("non-finite initial loss");
    result.loss_history.push_back(loss);

    while (loss > options.loss_target && result.epochs < options.max_epochs && lr > 1e-12) {
        const auto saved_params = params;
        const auto saved_m = m, saved_v = v;
        ++step;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1 - beta1) * grad[i];
            v[i] = beta2 * v[i] + (1 - beta2) * grad[i] * grad[i];
            params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
        clf.set_parameters(params);
        auto [next_loss, next_grad] = clf.loss_and_gradient(X, Y);
        if (!std::isfinite(next_loss))
            throw TrainingDiverged("loss became non-finite at epoch " + std::to_string(result.epochs) +
                                   " (lr=" + std::to_string(lr) + ", last loss=" + std::to_string(loss) + ")");
        ++result.epochs;
        if (next_loss > loss + 1e-6) {
            params = saved_params;
            m = saved_m;
            v = saved_v;
            --step;
            clf.set_parameters(params);
            lr *= 0.5;
            ++result.lr_halvings;
            continue;
        }
        loss = next_loss;
        grad = std::move(next_grad);
        result.loss_history.push_back(loss);
    }
    result.final_loss = loss;
    result.converged = loss <= options.loss_target;
    return result;
}

double accuracy(const Classifier& clf, const std::vector<std::vector<double>>& X, const std::vector<int>& Y) {
    if (X.empty()) return 1.0;
    int correct = 0;
    for (std::size_t n = 0; n < X.size(); ++n) correct += clf.predict(X[n]) == Y[n];
    return static_cast<double>(correct) / static_cast<double>(X.size());
}

}  // namespace camp
