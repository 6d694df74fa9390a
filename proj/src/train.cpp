#include "cn/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cn/loss.hpp"

namespace cn {
namespace {

Matrix gather_rows(const Matrix& x, const std::vector<int>& idx, int begin, int end) {
    Matrix out(end - begin, x.cols);
    for (int r = begin; r < end; ++r)
        for (int c = 0; c < x.cols; ++c) out(r - begin, c) = x(idx[r], c);
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& y, const std::vector<int>& idx,
                               int begin, int end) {
    std::vector<int> out(end - begin);
    for (int r = begin; r < end; ++r) out[r - begin] = y[idx[r]];
    return out;
}

double fraction_correct(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (truth.empty()) return std::nan("");
    int hits = 0;
    for (size_t i = 0; i < truth.size(); ++i)
        if (pred[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace

void TrainConfig::validate() const {
    require(max_steps >= 1, "TrainConfig: max_steps must be at least 1");
    require(disc_steps >= 1, "TrainConfig: disc_steps must be at least 1");
    require(batch_size >= 2, "TrainConfig: batch_size must be at least 2");
    require(lr_ephysician > 0.0 && lr_discriminator > 0.0 && lr_classifier > 0.0,
            "TrainConfig: learning rates must be positive");
    require(convergence_tol > 0.0, "TrainConfig: convergence_tol must be positive");
}

const char* to_string(StopReason r) {
    return r == StopReason::kConverged ? "converged" : "max_steps";
}

void TrainHistory::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "step,L_C_train,L_D_train,val_accuracy,stop_reason\n";
    char buf[96];
    for (size_t i = 0; i < steps.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,", steps[i], train_loss_c[i],
                      train_loss_d[i], val_accuracy[i]);
        out << buf;
        if (i + 1 == steps.size()) out << to_string(stop_reason);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

bool convergence_check(const std::vector<double>& losses, double tol) {
    if (losses.size() < 2) return false;
    return std::fabs(losses[losses.size() - 1] - losses[losses.size() - 2]) < tol;
}

Trainer::Trainer(ConsensusModel& model, TrainConfig cfg, Rng& rng)
    : model_(model),
      cfg_(cfg),
      rng_(rng),
      adam_eph_({.lr = cfg.lr_ephysician}),
      adam_disc_({.lr = cfg.lr_discriminator}),
      adam_clf_({.lr = cfg.lr_classifier}) {
    cfg_.validate();
    require(cfg_.noise_enabled == model_.config().noise_enabled,
            "Trainer: noise flag disagrees with the model's noise configuration");
}

double Trainer::step_cooperative(const Matrix& xb, const std::vector<int>& yb) {
    auto reps = model_.encode_all(xb, true, false);
    model_.zero_all_grads();
    double loss = model_.classifier_loss_backward(reps, yb, cfg_.cooperative);
    adam_clf_.step(model_.classifier_params());
    if (cfg_.cooperative) adam_eph_.step(model_.ephysician_params());
    return loss;
}

double Trainer::step_adversarial(const Matrix& xb, const Matrix* noise) {
    auto reps = model_.encode_all(xb, true, false);
    model_.zero_all_grads();
    double loss = model_.discriminator_loss_backward(reps, noise, true);
    adam_eph_.step(model_.ephysician_params(), -1.0);
    return loss;
}

double Trainer::step_discriminator_once(const Matrix& xb, const Matrix* noise) {
    auto reps = model_.encode_all(xb, true, false);
    model_.zero_all_grads();
    double loss = model_.discriminator_loss_backward(reps, noise, false);
    adam_disc_.step(model_.discriminator_params());
    return loss;
}

std::pair<double, double> Trainer::evaluate_losses(const Matrix& x, const std::vector<int>& y,
                                                   std::vector<Matrix>* reps_out,
                                                   Matrix* noise_out) {
    auto reps = model_.encode_all(x, true, false);
    double loss_c = model_.classifier_loss(reps, y);
    double loss_d;
    if (cfg_.noise_enabled) {
        Matrix noise = model_.sample_noise(reps, rng_);
        loss_d = model_.discriminator_loss(reps, &noise);
        if (noise_out) *noise_out = std::move(noise);
    } else {
        loss_d = model_.discriminator_loss(reps, nullptr);
        if (noise_out) *noise_out = Matrix();
    }
    if (reps_out) *reps_out = std::move(reps);
    return {loss_c, loss_d};
}

TrainHistory Trainer::run(const Matrix& x_train, const std::vector<int>& y_train,
                          const Matrix& x_val, const std::vector<int>& y_val,
                          const StepObserver& observer) {
    require(x_train.rows == static_cast<int>(y_train.size()),
            "Trainer::run: training labels do not match the feature rows");
    require(x_train.rows >= 2, "Trainer::run: need at least two training samples");
    require(x_val.rows == static_cast<int>(y_val.size()),
            "Trainer::run: validation labels do not match the feature rows");

    TrainHistory history;
    std::vector<int> order(x_train.rows);
    std::iota(order.begin(), order.end(), 0);

    for (int step = 1; step <= cfg_.max_steps; ++step) {
        rng_.shuffle(order);
        for (int begin = 0; begin < x_train.rows; begin += cfg_.batch_size) {
            int end = std::min(begin + cfg_.batch_size, x_train.rows);
            if (end - begin < 2) break;
            Matrix xb = gather_rows(x_train, order, begin, end);
            std::vector<int> yb = gather_labels(y_train, order, begin, end);

            auto reps0 = model_.encode_all(xb, true, true);
            Matrix noise;
            const Matrix* noise_ptr = nullptr;
            if (cfg_.noise_enabled) {
                noise = model_.sample_noise(reps0, rng_);
                noise_ptr = &noise;
            }
            step_cooperative(xb, yb);
            step_adversarial(xb, noise_ptr);
            for (int k = 0; k < cfg_.disc_steps; ++k) step_discriminator_once(xb, noise_ptr);
        }

        std::vector<Matrix> train_reps;
        Matrix noise;
        auto [loss_c, loss_d] = evaluate_losses(x_train, y_train, &train_reps, &noise);
        if (!std::isfinite(loss_c) || !std::isfinite(loss_d))
            throw std::runtime_error("training diverged: non-finite loss at step " +
                                     std::to_string(step));
        double val_acc = x_val.rows > 0 ? fraction_correct(model_.predict(x_val), y_val)
                                        : std::nan("");

        history.steps.push_back(step);
        history.train_loss_c.push_back(loss_c);
        history.train_loss_d.push_back(loss_d);
        history.val_accuracy.push_back(val_acc);
        if (observer)
            observer(step, train_reps, cfg_.noise_enabled ? &noise : nullptr, loss_c, loss_d,
                     val_acc);

        if (convergence_check(history.train_loss_c, cfg_.convergence_tol)) {
            history.stop_reason = StopReason::kConverged;
            return history;
        }
    }
    history.stop_reason = StopReason::kMaxSteps;
    return history;
}

TrainHistory train_mlp_classifier(Mlp& net, const TrainConfig& cfg, Rng& rng,
                                  const Matrix& x_train, const std::vector<int>& y_train,
                                  const Matrix& x_val, const std::vector<int>& y_val) {
    cfg.validate();
    require(x_train.rows == static_cast<int>(y_train.size()),
            "train_mlp_classifier: training labels do not match the feature rows");
    require(x_train.rows >= 2, "train_mlp_classifier: need at least two training samples");
    require(x_val.rows == static_cast<int>(y_val.size()),
            "train_mlp_classifier: validation labels do not match the feature rows");

    Adam adam({.lr = cfg.lr_classifier});
    TrainHistory history;
    std::vector<int> order(x_train.rows);
    std::iota(order.begin(), order.end(), 0);

    for (int step = 1; step <= cfg.max_steps; ++step) {
        rng.shuffle(order);
        for (int begin = 0; begin < x_train.rows; begin += cfg.batch_size) {
            int end = std::min(begin + cfg.batch_size, x_train.rows);
            if (end - begin < 2) break;
            Matrix xb = gather_rows(x_train, order, begin, end);
            std::vector<int> yb = gather_labels(y_train, order, begin, end);
            auto ce = softmax_cross_entropy(net.forward(xb, true, true), yb);
            net.zero_grads();
            net.backward(ce.d_logits);
            adam.step(net.params());
        }

        auto ce = softmax_cross_entropy(net.forward(x_train, true, false), y_train);
        if (!std::isfinite(ce.loss))
            throw std::runtime_error("training diverged: non-finite loss at step " +
                                     std::to_string(step));
        double val_acc =
            x_val.rows > 0 ? fraction_correct(mlp_predict(net, x_val), y_val) : std::nan("");

        history.steps.push_back(step);
        history.train_loss_c.push_back(ce.loss);
        history.train_loss_d.push_back(0.0);
        history.val_accuracy.push_back(val_acc);

        if (convergence_check(history.train_loss_c, cfg.convergence_tol)) {
            history.stop_reason = StopReason::kConverged;
            return history;
        }
    }
    history.stop_reason = StopReason::kMaxSteps;
    return history;
}

std::vector<int> mlp_predict(Mlp& net, const Matrix& x) {
    Matrix logits = net.forward(x, false);
    std::vector<int> pred(x.rows, 0);
    for (int r = 0; r < logits.rows; ++r) {
        int best = 0;
        for (int c = 1; c < logits.cols; ++c)
            if (logits(r, c) > logits(r, best)) best = c;
        pred[r] = best;
    }
    return pred;
}

}  // namespace cn
