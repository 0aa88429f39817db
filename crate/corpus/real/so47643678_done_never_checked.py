# Recreation of Stack Overflow question 47643678: the done flag returned by
# env.step is stored but never used to end the episode.
import random
from collections import deque

import gym
import numpy as np
from keras.models import Sequential
from keras.layers import Dense
from keras.optimizers import Adam

env = gym.make("CartPole-v0")
action_size = env.action_space.n
gamma = 0.95
epsilon = 1.0
epsilon_min = 0.01
epsilon_decay = 0.995
batch_size = 32
memory = deque(maxlen=2000)

model = Sequential()
model.add(Dense(24, input_dim=4, activation="relu"))
model.add(Dense(action_size, activation="linear"))
model.compile(loss="mse", optimizer=Adam(lr=0.001))

for e in range(500):
    state = np.reshape(env.reset(), [1, 4])
    for t in range(200):
        if np.random.rand() <= epsilon:
            action = random.randrange(action_size)
        else:
            action = np.argmax(model.predict(state)[0])
        next_state, reward, done, _ = env.step(action)
        next_state = np.reshape(next_state, [1, 4])
        memory.append((state, action, reward, next_state, done))
        state = next_state
        if len(memory) > batch_size:
            for state_b, action_b, reward_b, next_b, done in random.sample(memory, batch_size):
                target = reward_b
                if not done:
                    target = reward_b + gamma * np.amax(model.predict(next_b)[0])
                target_f = model.predict(state_b)
                target_f[0][action_b] = target
                model.fit(state_b, target_f, epochs=1, verbose=0)
    if epsilon > epsilon_min:
        epsilon *= epsilon_decay

env.close()
