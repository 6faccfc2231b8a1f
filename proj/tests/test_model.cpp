#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "linkpred/model.hpp"
#include "support/synthetic.hpp"

using linkpred::DenseMatrix;
using linkpred::DropoutMasks;
using linkpred::ForwardMode;
using linkpred::ModelParams;
using linkpred::ModelVariant;
using linkpred::NodeId;
using linkpred::SparseGraph;

namespace {

constexpr int kK = 3;
constexpr NodeId kN = 5;

SparseGraph toy_graph() {
  // 0-1, 0-2, 1-2 triangle plus pendant 3-4.
  const std::vector<std::pair<NodeId, NodeId>> edges = {
      {0, 1}, {0, 2}, {1, 2}, {3, 4}};
  return SparseGraph::from_edges(kN, edges);
}

std::vector<double> adjacency_row(const SparseGraph& g, NodeId i) {
  std::vector<double> row(static_cast<std::size_t>(g.num_nodes()), 0.0);
  for (NodeId j : g.neighbors(i)) row[static_cast<std::size_t>(j)] = 1.0;
  return row;
}

}  // namespace

TEST(Init, ShapesAndTying) {
  for (bool tied : {true, false}) {
    const ModelParams p =
        ModelParams::init(ModelVariant::Joint, kK, kN, tied, 1.0, 7);
    EXPECT_EQ(p.enc.rows, static_cast<std::size_t>(kN));
    EXPECT_EQ(p.enc.cols, static_cast<std::size_t>(kK));
    EXPECT_EQ(p.dec.rows, static_cast<std::size_t>(kN));
    EXPECT_EQ(p.dec.cols, static_cast<std::size_t>(kK));
    EXPECT_EQ(p.ae_hidden_bias.size(), static_cast<std::size_t>(kK));
    EXPECT_EQ(p.ae_output_bias.size(), static_cast<std::size_t>(kN));
    EXPECT_EQ(p.mf_hidden_bias.size(), static_cast<std::size_t>(kK));
    EXPECT_EQ(p.mf_output_bias.size(), static_cast<std::size_t>(kN));
    EXPECT_EQ(p.tied, tied);
    EXPECT_EQ(p.num_nodes(), kN);
    if (tied) {
      EXPECT_EQ(p.enc.data, p.dec.data);
    } else {
      EXPECT_NE(p.enc.data, p.dec.data);
    }
    for (double b : p.ae_hidden_bias) EXPECT_EQ(b, 0.0);
    for (double b : p.mf_output_bias) EXPECT_EQ(b, 0.0);
    const double bound = 0.05 / std::sqrt(static_cast<double>(kK));
    for (double w : p.enc.data) {
      EXPECT_GE(w, -bound);
      EXPECT_LT(w, bound);
    }
  }
}

TEST(Init, DeterministicPerSeed) {
  const ModelParams a = ModelParams::init(ModelVariant::Joint, kK, kN, false, 1.0, 3);
  const ModelParams b = ModelParams::init(ModelVariant::Joint, kK, kN, false, 1.0, 3);
  const ModelParams c = ModelParams::init(ModelVariant::Joint, kK, kN, false, 1.0, 4);
  EXPECT_EQ(a.enc.data, b.enc.data);
  EXPECT_EQ(a.dec.data, b.dec.data);
  EXPECT_NE(a.enc.data, c.enc.data);
}

TEST(Init, AccessorsMatchLayout) {
  const ModelParams p = ModelParams::init(ModelVariant::Joint, kK, kN, false, 1.0, 5);
  for (int k = 0; k < kK; ++k)
    for (NodeId m = 0; m < kN; ++m) {
      EXPECT_EQ(p.w1(k, m), p.enc(static_cast<std::size_t>(m), static_cast<std::size_t>(k)));
      EXPECT_EQ(p.w2(m, k), p.dec(static_cast<std::size_t>(m), static_cast<std::size_t>(k)));
    }
}

TEST(Forward, ZeroParamsPredictHalfEverywhere) {
  const SparseGraph g = toy_graph();
  ModelParams p = ModelParams::init(ModelVariant::Joint, kK, kN, true, 1.0, 1);
  std::fill(p.enc.data.begin(), p.enc.data.end(), 0.0);
  p.dec.data = p.enc.data;
  const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  const auto ae = linkpred::ae_forward(p, adjacency_row(g, 0), masks, ForwardMode::Infer);
  const auto mf = linkpred::mf_forward(p, 0, masks, ForwardMode::Infer);
  for (double v : ae.recon) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double v : mf.recon) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(Forward, TrainWithFullMasksEqualsInferWithKeepOne) {
  const SparseGraph g = toy_graph();
  for (auto variant : {ModelVariant::MfLinear, ModelVariant::Autoencoder,
                       ModelVariant::Joint}) {
    ModelParams p = synthetic::random_params(variant, kK, kN, false, 1.0, 11);
    p.keep_hidden = 1.0;
    p.keep_input = 1.0;
    const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
    for (NodeId i = 0; i < kN; ++i) {
      if (linkpred::has_ae_branch(variant)) {
        const auto train =
            linkpred::ae_forward(p, adjacency_row(g, i), masks, ForwardMode::Train);
        const auto infer =
            linkpred::ae_forward(p, adjacency_row(g, i), masks, ForwardMode::Infer);
        ASSERT_EQ(train.recon, infer.recon);
        ASSERT_EQ(train.hidden, infer.hidden);
      }
      if (linkpred::has_mf_branch(variant)) {
        const auto train = linkpred::mf_forward(p, i, masks, ForwardMode::Train);
        const auto infer = linkpred::mf_forward(p, i, masks, ForwardMode::Infer);
        ASSERT_EQ(train.recon, infer.recon);
      }
    }
  }
}

TEST(Forward, InferScalesHiddenByKeepProbability) {
  // With keep_hidden = 0.5 the inference logits must use half the hidden
  // activations; verify against a by-hand forward pass.
  const SparseGraph g = toy_graph();
  ModelParams p = synthetic::random_params(ModelVariant::Autoencoder, kK, kN,
                                           false, 1.0, 13);
  p.keep_hidden = 0.5;
  p.keep_input = 0.5;
  const DropoutMasks masks;  // ignored in infer mode
  const auto out = linkpred::ae_forward(p, adjacency_row(g, 0), masks,
                                        ForwardMode::Infer);
  for (std::size_t t = 0; t < static_cast<std::size_t>(kK); ++t) {
    double u = p.ae_hidden_bias[t];
    for (NodeId m : g.neighbors(0))
      u += 0.5 * p.enc(static_cast<std::size_t>(m), t);  // input keep scaling
    EXPECT_NEAR(out.preact[t], u, 1e-12);
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(kN); ++j) {
    double z = p.ae_output_bias[j];
    for (std::size_t t = 0; t < static_cast<std::size_t>(kK); ++t)
      z += p.dec(j, t) * 0.5 * linkpred::relu(out.preact[t]);  // hidden keep
    EXPECT_NEAR(out.recon[j], linkpred::sigmoid(z), 1e-12);
  }
}

TEST(Forward, LinearVariantSkipsRelu) {
  ModelParams p = synthetic::random_params(ModelVariant::MfLinear, kK, kN, true,
                                           1.0, 17);
  // Force a negative pre-activation.
  p.mf_hidden_bias.assign(static_cast<std::size_t>(kK), -10.0);
  const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  const auto lin = linkpred::mf_forward(p, 0, masks, ForwardMode::Train);
  EXPECT_LT(lin.hidden[0], 0.0);
  EXPECT_EQ(lin.hidden, lin.preact);

  p.variant = ModelVariant::Joint;
  const auto relu = linkpred::mf_forward(p, 0, masks, ForwardMode::Train);
  EXPECT_EQ(relu.hidden[0], 0.0);
}

TEST(Forward, HiddenMaskSilencesAUnit) {
  // Crank up everything connected to unit 0; if the mask drops it, outputs
  // must be identical to a model where unit 0's outgoing weights are zero.
  const SparseGraph g = toy_graph();
  ModelParams loud = synthetic::random_params(ModelVariant::Autoencoder, kK, kN,
                                              false, 1.0, 19);
  ModelParams quiet = loud;
  for (std::size_t j = 0; j < static_cast<std::size_t>(kN); ++j) {
    loud.dec(j, 0) = 1e6;
    quiet.dec(j, 0) = 0.0;
  }
  DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  masks.hidden[0] = 0;
  const auto a = linkpred::ae_forward(loud, adjacency_row(g, 0), masks, ForwardMode::Train);
  const auto b = linkpred::ae_forward(quiet, adjacency_row(g, 0), masks, ForwardMode::Train);
  EXPECT_EQ(a.recon, b.recon);
}

TEST(Forward, InputMaskRemovesAnInput) {
  const SparseGraph g = toy_graph();
  ModelParams p = synthetic::random_params(ModelVariant::Autoencoder, kK, kN,
                                           false, 1.0, 23);
  DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  masks.input[1] = 0;  // node 1 is a neighbor of 0
  const auto masked =
      linkpred::ae_forward(p, adjacency_row(g, 0), masks, ForwardMode::Train);

  // Same forward with node 1 absent from the neighborhood entirely.
  std::vector<double> row = adjacency_row(g, 0);
  row[1] = 0.0;
  const DropoutMasks full = DropoutMasks::all_ones(kK, kN);
  const auto removed = linkpred::ae_forward(p, row, full, ForwardMode::Train);
  EXPECT_EQ(masked.recon, removed.recon);
}

TEST(Loss, ZeroParamsGiveClosedFormJointLoss) {
  // Every prediction is exactly 1/2, so each of the d positive and m negative
  // terms contributes log 2 (negatives weighted by eta) in both branches.
  const SparseGraph g = toy_graph();
  ModelParams p = ModelParams::init(ModelVariant::Joint, kK, kN, true, 1.0, 1);
  std::fill(p.enc.data.begin(), p.enc.data.end(), 0.0);
  p.dec.data = p.enc.data;
  const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  const std::vector<NodeId> negatives = {3, 4};
  const double eta = 0.7;
  const double loss = linkpred::example_loss(p, g, 0, negatives, masks, eta);
  const double d = static_cast<double>(g.degree(0));
  const double m = static_cast<double>(negatives.size());
  EXPECT_NEAR(loss, 2.0 * (d + eta * m) * std::log(2.0), 1e-12);
}

TEST(Loss, RhoWeightsTheFactorBranch) {
  const SparseGraph g = toy_graph();
  const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  const std::vector<NodeId> negatives = {3};

  ModelParams joint = synthetic::random_params(ModelVariant::Joint, kK, kN,
                                               false, 2.5, 29);
  ModelParams ae_only = joint;
  ae_only.variant = ModelVariant::Autoencoder;

  // joint_loss(rho) = ae_loss + rho * factor_loss with identical parameters,
  // so the factor part recovered by subtraction must scale linearly in rho.
  ModelParams joint_rho1 = joint;
  joint_rho1.rho = 1.0;
  const double l_ae = linkpred::example_loss(ae_only, g, 0, negatives, masks, 0.5);
  const double l_joint_r1 =
      linkpred::example_loss(joint_rho1, g, 0, negatives, masks, 0.5);
  const double l_joint_r25 =
      linkpred::example_loss(joint, g, 0, negatives, masks, 0.5);
  const double mf_part_r1 = l_joint_r1 - l_ae;
  const double mf_part_r25 = l_joint_r25 - l_ae;
  EXPECT_NEAR(mf_part_r25, 2.5 * mf_part_r1, 1e-9);
}

TEST(Loss, RejectsNegativeSampleThatIsALink) {
  const SparseGraph g = toy_graph();
  const ModelParams p = synthetic::random_params(ModelVariant::Joint, kK, kN,
                                                 true, 1.0, 31);
  const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  const std::vector<NodeId> link = {1};  // 0-1 is an edge
  EXPECT_THROW(linkpred::example_loss(p, g, 0, link, masks, 1.0),
               std::invalid_argument);
  const std::vector<NodeId> self = {0};
  EXPECT_THROW(linkpred::example_loss(p, g, 0, self, masks, 1.0),
               std::invalid_argument);
}

TEST(Combine, RhoZeroReturnsAutoencoderScoresBitwise) {
  const std::vector<double> ae = {0.1, 0.5, 0.9, 0.3333333333333333};
  const std::vector<double> mf = {0.9, 0.2, 0.1, 0.7};
  const auto out = linkpred::combine_predictions(ae, mf, 0.0);
  EXPECT_EQ(out, ae);
}

TEST(Combine, GeometricMeanAtRhoOne) {
  const std::vector<double> ae = {0.16, 0.5};
  const std::vector<double> mf = {0.04, 0.5};
  const auto out = linkpred::combine_predictions(ae, mf, 1.0);
  EXPECT_NEAR(out[0], std::sqrt(0.16 * 0.04), 1e-15);
  EXPECT_NEAR(out[1], 0.5, 1e-15);
}

TEST(Combine, ValidatesInput) {
  const std::vector<double> a = {0.1, 0.2}, b = {0.3};
  EXPECT_THROW(linkpred::combine_predictions(a, b, 1.0), std::invalid_argument);
  const std::vector<double> c = {0.4};
  EXPECT_THROW(linkpred::combine_predictions(c, c, -1.0), std::invalid_argument);
}

TEST(Score, MatchesBranchForwardsPerVariant) {
  const SparseGraph g = toy_graph();
  const DropoutMasks none;
  for (auto variant : {ModelVariant::MfLinear, ModelVariant::Autoencoder,
                       ModelVariant::Joint}) {
    ModelParams p = synthetic::random_params(variant, kK, kN, false, 2.0, 37);
    p.keep_hidden = 0.5;
    p.keep_input = 0.5;
    for (NodeId i = 0; i < kN; ++i) {
      const auto scores = linkpred::score_node(p, g, i);
      ASSERT_EQ(scores.size(), static_cast<std::size_t>(kN));
      std::vector<double> expect;
      if (variant == ModelVariant::MfLinear) {
        expect = linkpred::mf_forward(p, i, none, ForwardMode::Infer).recon;
      } else if (variant == ModelVariant::Autoencoder) {
        expect = linkpred::ae_forward(p, adjacency_row(g, i), none,
                                      ForwardMode::Infer).recon;
      } else {
        const auto ae = linkpred::ae_forward(p, adjacency_row(g, i), none,
                                             ForwardMode::Infer).recon;
        const auto mf = linkpred::mf_forward(p, i, none, ForwardMode::Infer).recon;
        expect = linkpred::combine_predictions(ae, mf, p.rho);
      }
      EXPECT_EQ(scores, expect) << linkpred::to_string(variant) << " node " << i;
    }
  }
}

TEST(Gradients, ZerosLikeMatchesShapes) {
  const ModelParams p = synthetic::random_params(ModelVariant::Joint, kK, kN,
                                                 true, 1.0, 41);
  const auto z = linkpred::Gradients::zeros_like(p);
  EXPECT_EQ(z.enc.rows, p.enc.rows);
  EXPECT_EQ(z.dec.cols, p.dec.cols);
  EXPECT_EQ(z.ae_output_bias.size(), p.ae_output_bias.size());
  for (double v : z.enc.data) EXPECT_EQ(v, 0.0);
}

TEST(Gradients, TiedGradientLandsInEncOnly) {
  const SparseGraph g = toy_graph();
  const ModelParams p = synthetic::random_params(ModelVariant::Joint, kK, kN,
                                                 true, 1.0, 43);
  const DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  const std::vector<NodeId> negatives = {3};
  const auto grad = linkpred::example_gradient(p, g, 0, negatives, masks, 0.5);
  bool any_enc = false;
  for (double v : grad.enc.data) any_enc |= (v != 0.0);
  EXPECT_TRUE(any_enc);
  for (double v : grad.dec.data) EXPECT_EQ(v, 0.0);
}

TEST(Gradients, MaskedHiddenUnitGetsNoGradient) {
  const SparseGraph g = toy_graph();
  for (auto variant : {ModelVariant::Autoencoder, ModelVariant::Joint}) {
    const ModelParams p = synthetic::random_params(variant, kK, kN, false, 1.0, 47);
    DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
    masks.hidden[1] = 0;
    const std::vector<NodeId> negatives = {3};
    const auto grad = linkpred::example_gradient(p, g, 0, negatives, masks, 0.5);
    for (std::size_t r = 0; r < grad.enc.rows; ++r) {
      EXPECT_EQ(grad.enc(r, 1), 0.0);  // encoder column of the dead unit
      EXPECT_EQ(grad.dec(r, 1), 0.0);  // decoder column of the dead unit
    }
    EXPECT_EQ(grad.ae_hidden_bias[1], 0.0);
  }
}

TEST(Gradients, MaskedInputGetsNoGradient) {
  const SparseGraph g = toy_graph();
  const ModelParams p = synthetic::random_params(ModelVariant::Autoencoder, kK,
                                                 kN, false, 1.0, 53);
  DropoutMasks masks = DropoutMasks::all_ones(kK, kN);
  masks.input[1] = 0;  // neighbor 1 of node 0 is dropped
  const std::vector<NodeId> negatives = {3};
  const auto grad = linkpred::example_gradient(p, g, 0, negatives, masks, 0.5);
  for (std::size_t t = 0; t < static_cast<std::size_t>(kK); ++t)
    EXPECT_EQ(grad.enc(1, t), 0.0);
}
