# DQN agent for CartPole-v0 with experience replay and a target network.
import random
from collections import deque

import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense
from keras.optimizers import Adam

env = gym.make("CartPole-v0")
state_size = env.observation_space.shape[0]
action_size = env.action_space.n

episodes = 500
max_steps = 200
gamma = 0.95
epsilon = 1.0
epsilon_min = 0.01
epsilon_decay = 0.995
learning_rate = 0.001
batch_size = 32
memory_size = 2000
target_update = 100

memory = deque(maxlen=memory_size)

model = Sequential()
model.add(Dense(24, input_dim=state_size, activation="relu"))
model.add(Dense(24, activation="relu"))
model.add(Dense(action_size, activation="linear"))
model.compile(loss="mse", optimizer=Adam(lr=learning_rate))

target_model = Sequential()
target_model.add(Dense(24, input_dim=state_size, activation="relu"))
target_model.add(Dense(24, activation="relu"))
target_model.add(Dense(action_size, activation="linear"))
target_model.compile(loss="mse", optimizer=Adam(lr=learning_rate))
target_model.set_weights(model.get_weights())

step_count = 0
for episode in range(episodes):
    state = env.reset()
    state = np.reshape(state, [1, state_size])
    for t in range(max_steps):
        if np.random.rand() <= epsilon:
            action = env.action_space.sample()
        else:
            q_values = model.predict(state)
            action = np.argmax(q_values[0])
        next_state, reward, done, _ = env.step(action)
        next_state = np.reshape(next_state, [1, state_size])
        memory.append((state, action, reward, next_state, done))
        state = next_state
        step_count += 1

        if len(memory) > batch_size:
            minibatch = random.sample(memory, batch_size)
            for s, a, r, s_next, terminal in minibatch:
                target = r
                if not terminal:
                    target = r + gamma * np.amax(target_model.predict(s_next)[0])
                target_f = model.predict(s)
                target_f[0][a] = target
                model.fit(s, target_f, epochs=1, verbose=0)

        if step_count % target_update == 0:
            target_model.set_weights(model.get_weights())


    if epsilon > epsilon_min:
        epsilon *= epsilon_decay

env.close()
