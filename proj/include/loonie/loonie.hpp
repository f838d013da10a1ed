#pragma once

#include "loonie/bpp.hpp"
#include "loonie/codec.hpp"
#include "loonie/half.hpp"
#include "loonie/hard_concrete.hpp"
#include "loonie/image.hpp"
#include "loonie/optim.hpp"
#include "loonie/rng.hpp"
#include "loonie/siren.hpp"
#include "loonie/trainer.hpp"
