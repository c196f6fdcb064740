#pragma once

#include "qctl/bloch.hpp"
#include "qctl/bounds.hpp"
#include "qctl/dynamics.hpp"
#include "qctl/errors.hpp"
#include "qctl/extremal.hpp"
#include "qctl/integrate.hpp"
#include "qctl/io.hpp"
#include "qctl/oracle.hpp"
#include "qctl/protocol.hpp"
#include "qctl/reconstruct.hpp"
#include "qctl/schedule.hpp"
