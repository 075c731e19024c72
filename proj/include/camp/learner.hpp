#pragma once

// Small fully connected classifier (ReLU hidden layers, softmax output)
// trained full-batch with Adam on mean cross-entropy.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace camp {

inline const std::vector<int> kDefaultHiddenLayers{50, 32, 10};

class TrainingDiverged : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Classifier {
  public:
    Classifier() = default;
    Classifier(int input_dim, int num_classes, std::vector<int> hidden = kDefaultHiddenLayers,
               std::uint64_t seed = 0);

    int input_dim() const { return input_dim_; }
    int num_classes() const { return num_classes_; }
    const std::vector<int>& layer_sizes() const { return sizes_; }

    /// Unnormalised class scores (logits).
    Eigen::VectorXd scores(const std::vector<double>& x) const;
    /// Argmax of the scores, lowest index on ties. Throws
    /// std::invalid_argument on a dimension mismatch.
    int predict(const std::vector<double>& x) const;

    /// Mean cross-entropy over the dataset.
    double loss(const std::vector<std::vector<double>>& X, const std::vector<int>& Y) const;
    /// Mean cross-entropy and its gradient w.r.t. parameters().
    std::pair<double, std::vector<double>> loss_and_gradient(const std::vector<std::vector<double>>& X,
                                                             const std::vector<int>& Y) const;

    /// Flattened weights and biases, layer by layer.
    std::vector<double> parameters() const;
    void set_parameters(const std::vector<double>& params);
    std::size_t num_parameters() const;

    /// Per-feature affine normalisation applied before the first layer.
    void set_normalization(std::vector<double> mean, std::vector<double> scale);

    void save(std::ostream& out) const;
    static Classifier load(std::istream& in);

  private:
    Eigen::MatrixXd normalize(const std::vector<std::vector<double>>& X) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& input, std::vector<Eigen::MatrixXd>* activations) const;

    int input_dim_ = 0;
    int num_classes_ = 0;
    std::vector<int> sizes_;
    std::vector<Eigen::MatrixXd> weights_;  // out x in
    std::vector<Eigen::VectorXd> biases_;
    Eigen::VectorXd mean_;
    Eigen::VectorXd scale_;
};

struct TrainOptions {
    double learning_rate = 1e-4;
    double loss_target = 1e-3;
    int max_epochs = 50000;
    std::vector<int> hidden = kDefaultHiddenLayers;
    /// Standardise inputs with the training-set mean and deviation.
    bool standardize = true;
};

struct TrainResult {
    Classifier classifier;
    double final_loss = 0.0;
    int epochs = 0;
    bool converged = false;
    /// Number of times the step size was halved after a loss increase.
    int lr_halvings = 0;
    std::vector<double> loss_history;
};

/// Full-batch Adam on mean cross-entropy until loss <= loss_target or
/// max_epochs. A step that increases the loss (beyond 1e-6) is rolled back
/// and the learning rate halved, so the loss history never increases.
TrainResult train_classifier(const std::vector<std::vector<double>>& X, const std::vector<int>& Y,
                             int num_classes, const TrainOptions& options, std::uint64_t seed);

double accuracy(const Classifier& clf, const std::vector<std::vector<double>>& X, const std::vector<int>& Y);

}  // namespace camp
