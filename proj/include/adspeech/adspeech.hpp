#pragma once

// Umbrella header.

#include "adspeech/audio/clip.hpp"
#include "adspeech/audio/resample.hpp"
#include "adspeech/audio/wav.hpp"
#include "adspeech/cli/config.hpp"
#include "adspeech/cli/experiment.hpp"
#include "adspeech/cli/manifest.hpp"
#include "adspeech/cli/synthetic.hpp"
#include "adspeech/dsp/features.hpp"
#include "adspeech/dsp/fft.hpp"
#include "adspeech/dsp/mfcc.hpp"
#include "adspeech/dsp/moments.hpp"
#include "adspeech/dsp/perturbation.hpp"
#include "adspeech/dsp/pitch.hpp"
#include "adspeech/dsp/zcr.hpp"
#include "adspeech/embed/backend.hpp"
#include "adspeech/embed/onnx.hpp"
#include "adspeech/embed/precomputed.hpp"
#include "adspeech/eval/cv.hpp"
#include "adspeech/eval/folds.hpp"
#include "adspeech/eval/metrics.hpp"
#include "adspeech/ml/trainer.hpp"
#include "adspeech/repr/fuse.hpp"
#include "adspeech/repr/select.hpp"
#include "adspeech/repr/standardize.hpp"
