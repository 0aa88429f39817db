# Recreation of Stack Overflow question 47750291: the agent never explores.
# Actions always come from argmax over the network output.
import random
from collections import deque

import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense
from keras.optimizers import Adam

env = gym.make("CartPole-v1")
state_size = env.observation_space.shape[0]
action_size = env.action_space.n
gamma = 0.95
batch_size = 32
memory = deque(maxlen=2000)


def build_model():
    model = Sequential()
    model.add(Dense(24, input_dim=state_size, activation="relu"))
    model.add(Dense(24, activation="relu"))
    model.add(Dense(action_size, activation="linear"))
    model.compile(loss="mse", optimizer=Adam(lr=0.001))
    return model


def act(model, state):
    act_values = model.predict(state)
    return np.argmax(act_values[0])


def replay(model):
    minibatch = random.sample(memory, batch_size)
    for state, action, reward, next_state, finished in minibatch:
        target = reward
        if not finished:
            target = reward + gamma * np.amax(model.predict(next_state)[0])
        target_f = model.predict(state)
        target_f[0][action] = target
        model.fit(state, target_f, epochs=1, verbose=0)


model = build_model()
for e in range(1000):
    state = env.reset()
    state = np.reshape(state, [1, state_size])
    for time in range(500):
        action = act(model, state)
        next_state, reward, done, _ = env.step(action)
        next_state = np.reshape(next_state, [1, state_size])
        memory.append((state, action, reward, next_state, done))
        state = next_state
        if done:
            print("episode: {}/{}, score: {}".format(e, 1000, time))
            break
    if len(memory) > batch_size:
        replay(model)

env.close()
